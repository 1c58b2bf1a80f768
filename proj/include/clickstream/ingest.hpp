#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include "clickstream/types.hpp"

namespace clickstream {

enum class LogFormat { Tsv, JsonLines };

LogFormat parse_log_format(std::string_view s);

/// Column order of the raw log. A TSV header, when present, must match.
inline constexpr std::array<std::string_view, 8> kRawColumns = {
    "client_id", "user_id",    "session_id", "timestamp",
    "event_id",  "event_type", "product_id", "product_meta"};

struct LineError {
  std::size_t line = 0;
  std::string message;
};

struct ParseResult {
  std::vector<RawEvent> events;
  std::size_t skipped = 0;
  std::vector<LineError> errors;
};

/// Reads a raw click log. Malformed lines are skipped and reported in the
/// result; an inconsistent TSV header throws FormatError.
ParseResult parse_raw_log(std::istream& in, LogFormat format);

struct SessionizationConfig {
  std::int64_t gap_ms = 1'800'000;
};

/// Splits each client's events into sessions: consecutive events join while
/// the gap is <= gap_ms. Events are stably sorted by timestamp per client,
/// and sessions come back ordered by (client_id, start time). Session ids are
/// "<client_id>.<first timestamp>".
std::vector<Session> sessionize(const std::vector<RawEvent>& events,
                                const SessionizationConfig& config = {});

/// Groups by the log's own session_id column instead of recomputing.
std::vector<Session> sessions_from_given_ids(
    const std::vector<RawEvent>& events);

/// Drops timestamps; label left unset. Throws EmptySession.
SymbolizedSession symbolize(const Session& session);

/// BUY iff the session contains at least one buy event.
Label label_session(const SymbolizedSession& s);

}  // namespace clickstream
