#pragma once

#include <array>
#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <span>
#include <vector>

#include "clickstream/posterior.hpp"
#include "clickstream/types.hpp"

namespace clickstream {

using TransitionRow = std::array<double, kNumEventTypes>;

/// One class's generating process: an order-k chain over the six event
/// codes with BOS-padded contexts, and a truncated geometric length law.
struct ClassProcess {
  /// 7^k rows, indexed by GeneratorSpec::context_index.
  std::vector<TransitionRow> table;
  double length_mean = 29.0;
};

struct GeneratorSpec {
  int order = 1;
  std::size_t min_len = 10;
  std::size_t max_len = 200;
  double prior_buy = 0.5;
  /// Exact class counts round(n * prior_buy) instead of per-session draws.
  bool stratified = true;
  std::uint64_t seed = 0;
  /// Indexed by class_index (NOBUY = 0, BUY = 1).
  std::array<ClassProcess, 2> classes;

  std::size_t num_contexts() const;

  /// Context of position t: the k previous tokens, BOS where t - j < 0.
  /// Digits are base 7 with BOS as 0, most recent token least significant.
  std::size_t context_index(std::span<const Token> symbols, std::size_t t) const;
  std::size_t context_index_of(std::span<const Token> context) const;

  const ClassProcess& process(Label l) const;
  ClassProcess& process(Label l);

  /// Throws InvalidSpec on non-stochastic rows or inconsistent bounds.
  void validate() const;
};

/// Truncated geometric on [min_len, max_len] whose untruncated mean is
/// `mean`: P(L = l) proportional to p (1 - p)^(l - min_len), p = 1 / (mean - min_len + 1).
double length_log_pmf(const GeneratorSpec& spec, Label l, std::size_t length);

/// Labeled sessions, deterministic in (spec.seed, index) per session.
SessionList generate(const GeneratorSpec& spec, std::size_t n_sessions);

/// Exact posterior under the generating process, length factor included.
Posterior bayes_oracle(const GeneratorSpec& spec, const SymbolizedSession& s);
double class_log_likelihood(const GeneratorSpec& spec, Label l, std::span<const Token> symbols);

/// Order-1 BUY/NOBUY chains with the qualitative contrasts of the published
/// event statistics (BUY: far more add-to-cart and somewhat more
/// remove-from-cart; NOBUY: more detail views), no mass on buy, and class
/// length means 46 (BUY) / 28 (NOBUY).
GeneratorSpec default_generator_spec();

/// Order-k spec where BUY sessions tend to repeat the symbol `buy_lag`
/// steps back and NOBUY sessions the symbol `nobuy_lag` steps back, with
/// probability `repeat_prob`; otherwise uniform over the five non-buy
/// codes. Lag-1 statistics carry no class signal. Equal length laws.
GeneratorSpec lagged_repeat_spec(int buy_lag, int nobuy_lag, double repeat_prob,
                                 double length_mean = 25.0);

nlohmann::json to_json(const GeneratorSpec& spec);
GeneratorSpec generator_spec_from_json(const nlohmann::json& j);

}  // namespace clickstream
