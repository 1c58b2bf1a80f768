#include "clickstream/types.hpp"

#include "clickstream/errors.hpp"

namespace clickstream {

namespace {
constexpr std::array<std::string_view, kNumEventTypes> kNames = {
    "view", "detail", "add", "remove", "buy", "click"};
}

std::string_view name(EventType e) { return kNames[code(e) - 1]; }

EventType parse_event_type(std::string_view s) {
  for (int i = 0; i < kNumEventTypes; ++i) {
    if (s == kNames[i]) return static_cast<EventType>(i + 1);
  }
  if (s.size() == 1 && s[0] >= '1' && s[0] <= '6') {
    return static_cast<EventType>(s[0] - '0');
  }
  throw UnknownEventType("'" + std::string(s) + "'");
}

std::string_view label_name(Label l) {
  return l == Label::Buy ? "BUY" : "NOBUY";
}

Label parse_label(std::string_view s) {
  if (s == "BUY") return Label::Buy;
  if (s == "NOBUY") return Label::NoBuy;
  throw FormatError("unknown label '" + std::string(s) + "'");
}

ClassCounts count_labels(const SessionList& sessions) {
  ClassCounts c;
  for (const auto& s : sessions) {
    if (!s.label) continue;
    (*s.label == Label::Buy ? c.buy : c.nobuy) += 1;
  }
  return c;
}

SessionList filter_label(const SessionList& sessions, Label l) {
  SessionList out;
  for (const auto& s : sessions) {
    if (s.label == l) out.push_back(s);
  }
  return out;
}

}  // namespace clickstream
