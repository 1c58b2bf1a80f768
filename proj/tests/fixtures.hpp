#pragma once

#include "clickstream/synthgen.hpp"

namespace clickstream::testing {

/// Order-1 chains over the five non-buy codes with every row well visited,
/// equal length laws in both classes.
inline GeneratorSpec well_mixed_spec(std::uint64_t seed) {
  GeneratorSpec spec;
  spec.order = 1;
  spec.seed = seed;
  //               view  detail add   remove buy  click
  auto& nobuy = spec.process(Label::NoBuy);
  nobuy.length_mean = 25.0;
  nobuy.table = {
      {0.30, 0.25, 0.15, 0.10, 0.0, 0.20},  // BOS
      {0.30, 0.25, 0.15, 0.10, 0.0, 0.20},  // view
      {0.25, 0.30, 0.15, 0.10, 0.0, 0.20},  // detail
      {0.20, 0.20, 0.25, 0.15, 0.0, 0.20},  // add
      {0.25, 0.20, 0.20, 0.15, 0.0, 0.20},  // remove
      {0.30, 0.25, 0.15, 0.10, 0.0, 0.20},  // buy
      {0.25, 0.25, 0.15, 0.10, 0.0, 0.25},  // click
  };
  auto& buy = spec.process(Label::Buy);
  buy.length_mean = 25.0;
  buy.table = {
      {0.20, 0.20, 0.25, 0.15, 0.0, 0.20},
      {0.22, 0.20, 0.25, 0.13, 0.0, 0.20},
      {0.20, 0.22, 0.25, 0.13, 0.0, 0.20},
      {0.15, 0.15, 0.35, 0.15, 0.0, 0.20},
      {0.20, 0.15, 0.25, 0.20, 0.0, 0.20},
      {0.22, 0.20, 0.25, 0.13, 0.0, 0.20},
      {0.20, 0.20, 0.25, 0.15, 0.0, 0.20},
  };
  return spec;
}

/// Longest prefix of `sessions` holding at least `events` symbols.
inline SessionList take_events(const SessionList& sessions, std::size_t events) {
  SessionList out;
  std::size_t n = 0;
  for (const auto& s : sessions) {
    if (n >= events) break;
    out.push_back(s);
    n += s.length();
  }
  return out;
}

inline std::size_t count_events(const SessionList& sessions) {
  std::size_t n = 0;
  for (const auto& s : sessions) n += s.length();
  return n;
}

}  // namespace clickstream::testing
