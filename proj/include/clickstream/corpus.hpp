#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <nlohmann/json_fwd.hpp>

#include "clickstream/types.hpp"

namespace clickstream {

struct SplitFractions {
  double train = 0.70;
  double validation = 0.15;
  double test = 0.15;
};

struct PrepConfig {
  std::size_t min_len = 10;
  std::size_t max_len = 200;
  SplitFractions split;
  std::uint64_t seed = 0;

  /// Throws InvalidSpec on bad bounds or fractions not summing to 1.
  void validate() const;
};

/// BUY sessions are truncated just before their first buy event; NOBUY
/// sessions pass through unchanged.
SymbolizedSession cut_before_first_buy(const SymbolizedSession& s);

struct SplitSizes {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
};

/// floor for train and validation, remainder to test.
SplitSizes split_sizes(std::size_t n, const SplitFractions& f);

/// Length filter, cut-before-buy, re-filter, seeded downsampling of the
/// majority class, then a stratified per-class split. Throws
/// InsufficientData when a class is empty after filtering.
Corpus prepare(const SessionList& sessions, const PrepConfig& cfg);

using TransitionMatrix = Eigen::Matrix<double, kNumEventTypes, kNumEventTypes>;
using EventDistribution = Eigen::Matrix<double, kNumEventTypes, 1>;

struct LengthSummary {
  std::size_t sessions = 0;
  std::size_t events = 0;
  /// Nearest-rank percentiles 0/25/50/75/100.
  std::array<std::size_t, 5> percentiles{};
  double mean = 0.0;
  /// Population standard deviation.
  double sd = 0.0;
};

struct LabelStats {
  LengthSummary lengths;
  EventDistribution event_counts = EventDistribution::Zero();
  EventDistribution event_freq = EventDistribution::Zero();
  /// Row-normalized bigram counts, row = previous event.
  TransitionMatrix transitions = TransitionMatrix::Zero();
  /// Rows with no outgoing transitions (left all-zero).
  std::array<bool, kNumEventTypes> empty_rows{};
};

struct CorpusStats {
  LabelStats all;
  std::optional<LabelStats> buy;
  std::optional<LabelStats> nobuy;
  /// BUY minus NOBUY transition probabilities, when both classes exist.
  std::optional<TransitionMatrix> transition_diff;
};

/// Throws EmptyInput on an empty set.
CorpusStats compute_stats(const SessionList& sessions);
LabelStats compute_label_stats(const SessionList& sessions);

std::size_t nearest_rank_percentile(const std::vector<std::size_t>& sorted,
                                    double p);

nlohmann::json stats_to_json(const CorpusStats& stats);

}  // namespace clickstream
