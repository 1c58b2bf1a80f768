#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace clickstream {

/// Click-event vocabulary. view and detail are fixed at 1 and 2; the rest
/// follow the dataset's published listing order.
enum class EventType : std::uint8_t {
  View = 1,
  Detail = 2,
  Add = 3,
  Remove = 4,
  Buy = 5,
  Click = 6,
};

inline constexpr int kNumEventTypes = 6;

inline constexpr std::array<EventType, kNumEventTypes> kAllEventTypes = {
    EventType::View, EventType::Detail, EventType::Add,
    EventType::Remove, EventType::Buy, EventType::Click};

constexpr int code(EventType e) { return static_cast<int>(e); }

std::string_view name(EventType e);

/// Accepts a vocabulary name ("view") or its code ("1").
/// Throws UnknownEventType otherwise.
EventType parse_event_type(std::string_view name_or_code);

/// Model token space: PAD, the six event codes, BOS and EOS.
using Token = std::uint8_t;

namespace token {
inline constexpr Token kPad = 0;
inline constexpr Token kBos = 7;
inline constexpr Token kEos = 8;
inline constexpr int kVocabSize = 9;

constexpr bool is_event(Token t) { return t >= 1 && t <= kNumEventTypes; }
}  // namespace token

enum class Label : std::uint8_t { NoBuy = 0, Buy = 1 };

std::string_view label_name(Label l);
Label parse_label(std::string_view s);

/// One row of the raw click log.
struct RawEvent {
  std::string client_id;
  std::optional<std::string> user_id;
  std::string session_id;
  std::int64_t timestamp_ms = 0;
  std::string event_id;
  EventType event_type = EventType::View;
  std::optional<std::string> product_id;
  std::optional<std::string> product_meta;
};

struct TimedEvent {
  EventType type;
  std::int64_t timestamp_ms;

  friend bool operator==(const TimedEvent&, const TimedEvent&) = default;
};

struct Session {
  std::string id;
  std::string client_id;
  std::vector<TimedEvent> events;
};

struct SymbolizedSession {
  std::string id;
  std::vector<Token> symbols;
  std::optional<Label> label;

  std::size_t length() const { return symbols.size(); }
  friend bool operator==(const SymbolizedSession&,
                         const SymbolizedSession&) = default;
};

using SessionList = std::vector<SymbolizedSession>;

/// Per-stage drop counters recorded by corpus preparation.
struct PrepLog {
  std::size_t input_total = 0;
  std::size_t dropped_short = 0;
  std::size_t dropped_long = 0;
  std::size_t cut = 0;
  std::size_t dropped_after_cut = 0;
  std::size_t downsampled = 0;
  std::size_t buy_after_filter = 0;
  std::size_t nobuy_after_filter = 0;
};

struct ClassCounts {
  std::size_t buy = 0;
  std::size_t nobuy = 0;

  std::size_t total() const { return buy + nobuy; }
  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

ClassCounts count_labels(const SessionList& sessions);

struct Corpus {
  SessionList train;
  SessionList validation;
  SessionList test;
  PrepLog prep_log;

  ClassCounts train_counts() const { return count_labels(train); }
  ClassCounts validation_counts() const { return count_labels(validation); }
  ClassCounts test_counts() const { return count_labels(test); }
};

/// Sessions of one label, in input order.
SessionList filter_label(const SessionList& sessions, Label l);

}  // namespace clickstream
