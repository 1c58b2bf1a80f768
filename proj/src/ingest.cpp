#include "clickstream/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <nlohmann/json.hpp>
#include <string_view>

#include "clickstream/errors.hpp"

namespace clickstream {

namespace {

using nlohmann::json;

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::optional<std::string> optional_field(std::string_view s) {
  if (s.empty()) return std::nullopt;
  return std::string(s);
}

std::int64_t parse_timestamp(std::string_view s) {
  std::int64_t v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw FormatError("bad timestamp '" + std::string(s) + "'");
  }
  if (v <= 0) throw FormatError("timestamp must be positive");
  return v;
}

void require_id(const std::string& value, std::string_view field) {
  if (value.empty()) throw FormatError(std::string(field) + " is empty");
}

RawEvent event_from_fields(const std::vector<std::string_view>& f) {
  if (f.size() != kRawColumns.size()) {
    throw FormatError("expected " + std::to_string(kRawColumns.size()) +
                      " fields, got " + std::to_string(f.size()));
  }
  RawEvent e;
  e.client_id = std::string(f[0]);
  e.user_id = optional_field(f[1]);
  e.session_id = std::string(f[2]);
  e.timestamp_ms = parse_timestamp(f[3]);
  e.event_id = std::string(f[4]);
  e.event_type = parse_event_type(f[5]);
  e.product_id = optional_field(f[6]);
  e.product_meta = optional_field(f[7]);
  require_id(e.client_id, "client_id");
  require_id(e.session_id, "session_id");
  return e;
}

std::string string_field(const json& obj, const char* key, bool required) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (required) throw FormatError(std::string("missing field ") + key);
    return {};
  }
  if (!it->is_string()) {
    throw FormatError(std::string("field ") + key + " must be a string");
  }
  return it->get<std::string>();
}

RawEvent event_from_json(std::string_view line) {
  const json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (obj.is_discarded() || !obj.is_object()) {
    throw FormatError("not a JSON object");
  }
  RawEvent e;
  e.client_id = string_field(obj, "client_id", true);
  e.user_id = optional_field(string_field(obj, "user_id", false));
  e.session_id = string_field(obj, "session_id", true);
  const auto ts = obj.find("timestamp");
  if (ts == obj.end()) throw FormatError("missing field timestamp");
  if (ts->is_number_integer()) {
    e.timestamp_ms = ts->get<std::int64_t>();
    if (e.timestamp_ms <= 0) throw FormatError("timestamp must be positive");
  } else if (ts->is_string()) {
    e.timestamp_ms = parse_timestamp(ts->get<std::string>());
  } else {
    throw FormatError("timestamp must be an integer");
  }
  e.event_id = string_field(obj, "event_id", false);
  e.event_type = parse_event_type(string_field(obj, "event_type", true));
  e.product_id = optional_field(string_field(obj, "product_id", false));
  if (const auto meta = obj.find("product_meta");
      meta != obj.end() && !meta->is_null()) {
    e.product_meta = meta->is_string() ? meta->get<std::string>() : meta->dump();
  }
  require_id(e.client_id, "client_id");
  require_id(e.session_id, "session_id");
  return e;
}

std::vector<Session> group_sessions(
    std::map<std::string, std::vector<const RawEvent*>>& groups,
    std::int64_t gap_ms) {
  std::vector<Session> out;
  for (auto& [client, evs] : groups) {
    std::stable_sort(evs.begin(), evs.end(),
                     [](const RawEvent* a, const RawEvent* b) {
                       return a->timestamp_ms < b->timestamp_ms;
                     });
    Session current;
    for (const RawEvent* e : evs) {
      if (!current.events.empty() &&
          e->timestamp_ms - current.events.back().timestamp_ms > gap_ms) {
        out.push_back(std::move(current));
        current = Session{};
      }
      if (current.events.empty()) {
        current.client_id = e->client_id;
        current.id = client + "." + std::to_string(e->timestamp_ms);
      }
      current.events.push_back({e->event_type, e->timestamp_ms});
    }
    if (!current.events.empty()) out.push_back(std::move(current));
  }
  return out;
}

}  // namespace

LogFormat parse_log_format(std::string_view s) {
  if (s == "tsv") return LogFormat::Tsv;
  if (s == "jsonl" || s == "json-lines") return LogFormat::JsonLines;
  throw FormatError("unknown log format '" + std::string(s) + "'");
}

ParseResult parse_raw_log(std::istream& in, LogFormat format) {
  ParseResult result;
  std::string line;
  std::size_t line_no = 0;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    if (format == LogFormat::Tsv && first_content_line) {
      first_content_line = false;
      const auto fields = split_tabs(line);
      if (fields.front() == kRawColumns.front()) {
        if (!std::equal(fields.begin(), fields.end(), kRawColumns.begin(),
                        kRawColumns.end())) {
          throw FormatError("header does not match the raw log schema");
        }
        continue;
      }
    }

    try {
      if (format == LogFormat::Tsv) {
        result.events.push_back(event_from_fields(split_tabs(line)));
      } else {
        result.events.push_back(event_from_json(line));
      }
    } catch (const Error& e) {
      ++result.skipped;
      result.errors.push_back({line_no, e.what()});
    }
  }
  return result;
}

std::vector<Session> sessionize(const std::vector<RawEvent>& events,
                                const SessionizationConfig& config) {
  if (config.gap_ms <= 0) throw InvalidSpec("gap_ms must be positive");
  std::map<std::string, std::vector<const RawEvent*>> by_client;
  for (const auto& e : events) by_client[e.client_id].push_back(&e);
  // group_sessions already yields (client_id, start) order since the map is
  // keyed by client and sessions are emitted chronologically.
  return group_sessions(by_client, config.gap_ms);
}

std::vector<Session> sessions_from_given_ids(
    const std::vector<RawEvent>& events) {
  std::map<std::string, std::vector<const RawEvent*>> by_session;
  for (const auto& e : events) by_session[e.session_id].push_back(&e);
  std::vector<Session> out;
  for (auto& [sid, evs] : by_session) {
    std::stable_sort(evs.begin(), evs.end(),
                     [](const RawEvent* a, const RawEvent* b) {
                       return a->timestamp_ms < b->timestamp_ms;
                     });
    Session s;
    s.id = sid;
    s.client_id = evs.front()->client_id;
    for (const RawEvent* e : evs) s.events.push_back({e->event_type, e->timestamp_ms});
    out.push_back(std::move(s));
  }
  std::stable_sort(out.begin(), out.end(), [](const Session& a, const Session& b) {
    if (a.client_id != b.client_id) return a.client_id < b.client_id;
    return a.events.front().timestamp_ms < b.events.front().timestamp_ms;
  });
  return out;
}

SymbolizedSession symbolize(const Session& session) {
  if (session.events.empty()) throw EmptySession("session '" + session.id + "'");
  SymbolizedSession out;
  out.id = session.id;
  out.symbols.reserve(session.events.size());
  for (const auto& e : session.events) {
    out.symbols.push_back(static_cast<Token>(code(e.type)));
  }
  return out;
}

Label label_session(const SymbolizedSession& s) {
  const bool has_buy =
      std::find(s.symbols.begin(), s.symbols.end(),
                static_cast<Token>(code(EventType::Buy))) != s.symbols.end();
  return has_buy ? Label::Buy : Label::NoBuy;
}

}  // namespace clickstream
