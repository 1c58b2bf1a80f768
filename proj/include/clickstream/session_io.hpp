#pragma once

#include <filesystem>
#include <istream>
#include <ostream>

#include "clickstream/types.hpp"

namespace clickstream {

// Symbolized session text format, two lines per session:
//
//   4, e00caaf5048f482fa73a42f3f9e228966c29a585
//   2-1-1-2
//
// Labeled files append the label to the header: "4, <id>, BUY".

void write_session(std::ostream& out, const SymbolizedSession& s,
                   bool with_label);
void write_sessions(std::ostream& out, const SessionList& sessions,
                    bool with_label);

/// Parses either variant. Header length must match the symbol count; any
/// inconsistency throws FormatError naming the line.
SessionList read_sessions(std::istream& in);

SessionList read_sessions_file(const std::filesystem::path& path);
void write_sessions_file(const std::filesystem::path& path,
                         const SessionList& sessions, bool with_label);

/// Fills in missing labels with label_session.
void ensure_labels(SessionList& sessions);

}  // namespace clickstream
