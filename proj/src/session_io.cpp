#include "clickstream/session_io.hpp"

#include <charconv>
#include <fstream>
#include <string>

#include "clickstream/errors.hpp"
#include "clickstream/ingest.hpp"

namespace clickstream {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

[[noreturn]] void fail(std::size_t line_no, const std::string& msg) {
  throw FormatError("line " + std::to_string(line_no) + ": " + msg);
}

}  // namespace

void write_session(std::ostream& out, const SymbolizedSession& s,
                   bool with_label) {
  out << s.symbols.size() << ", " << s.id;
  if (with_label) {
    if (!s.label) throw FormatError("session '" + s.id + "' has no label");
    out << ", " << label_name(*s.label);
  }
  out << '\n';
  for (std::size_t i = 0; i < s.symbols.size(); ++i) {
    if (i) out << '-';
    out << static_cast<int>(s.symbols[i]);
  }
  out << '\n';
}

void write_sessions(std::ostream& out, const SessionList& sessions,
                    bool with_label) {
  for (const auto& s : sessions) write_session(out, s, with_label);
}

SessionList read_sessions(std::istream& in) {
  SessionList out;
  std::string header;
  std::string body;
  std::size_t line_no = 0;
  while (std::getline(in, header)) {
    ++line_no;
    if (trim(header).empty()) continue;
    const std::size_t header_line = line_no;
    if (!std::getline(in, body)) fail(header_line, "missing symbol line");
    ++line_no;

    std::string_view h = trim(header);
    SymbolizedSession s;
    const auto c1 = h.find(',');
    if (c1 == std::string_view::npos) fail(header_line, "expected '<length>, <id>'");
    const auto len_text = trim(h.substr(0, c1));
    std::size_t declared = 0;
    if (auto [p, ec] = std::from_chars(len_text.data(), len_text.data() + len_text.size(), declared);
        ec != std::errc{} || p != len_text.data() + len_text.size()) {
      fail(header_line, "bad length '" + std::string(len_text) + "'");
    }
    auto rest = h.substr(c1 + 1);
    const auto c2 = rest.find(',');
    s.id = std::string(trim(rest.substr(0, c2)));
    if (s.id.empty()) fail(header_line, "empty session id");
    if (c2 != std::string_view::npos) {
      try {
        s.label = parse_label(trim(rest.substr(c2 + 1)));
      } catch (const FormatError& e) {
        fail(header_line, e.what());
      }
    }

    std::string_view b = trim(body);
    while (!b.empty()) {
      const auto dash = b.find('-');
      const auto tok = b.substr(0, dash);
      int v = 0;
      if (auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
          ec != std::errc{} || p != tok.data() + tok.size() || v < 1 ||
          v > kNumEventTypes) {
        fail(line_no, "bad symbol '" + std::string(tok) + "'");
      }
      s.symbols.push_back(static_cast<Token>(v));
      if (dash == std::string_view::npos) break;
      b.remove_prefix(dash + 1);
    }
    if (s.symbols.size() != declared) {
      fail(header_line, "declared length " + std::to_string(declared) +
                            " but found " + std::to_string(s.symbols.size()) +
                            " symbols");
    }
    out.push_back(std::move(s));
  }
  return out;
}

SessionList read_sessions_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_sessions(in);
}

void write_sessions_file(const std::filesystem::path& path,
                         const SessionList& sessions, bool with_label) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  write_sessions(out, sessions, with_label);
}

void ensure_labels(SessionList& sessions) {
  for (auto& s : sessions) {
    if (!s.label) s.label = label_session(s);
  }
}

}  // namespace clickstream
