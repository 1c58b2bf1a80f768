#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <map>
#include <nlohmann/json_fwd.hpp>
#include <span>
#include <vector>

#include "clickstream/posterior.hpp"
#include "clickstream/types.hpp"

namespace clickstream {

constexpr std::size_t class_index(Label l) { return l == Label::Buy ? 1 : 0; }

/// Packs up to 15 tokens (4 bits each) into one integer key.
using GramKey = std::uint64_t;
GramKey pack_tokens(std::span<const Token> tokens);
std::vector<Token> unpack_tokens(GramKey key, int n);

/// Class log-priors from training label frequencies, indexed by class_index.
std::array<double, 2> log_priors_from(const SessionList& train);

// ---------------------------------------------------------------------------
// Bag-of-n-grams Naive Bayes

struct NgramNBModel {
  int n = 5;
  double alpha = 1.0;
  /// Per n-gram counts over the union vocabulary, indexed by class_index.
  std::map<GramKey, std::array<std::uint64_t, 2>> counts;
  std::array<std::uint64_t, 2> totals{};
  std::array<double, 2> log_prior{};

  std::size_t vocabulary_size() const { return counts.size(); }

  /// Laplace-smoothed log P(gram | class). Grams outside the vocabulary get
  /// the zero-count mass alpha / (total + alpha * |V|).
  double log_prob(Label l, GramKey gram) const;

  double log_likelihood(Label l, std::span<const Token> symbols) const;
};

/// Throws InsufficientData if a class has no session of length >= n.
NgramNBModel nb_train(const SessionList& train, int n, double alpha = 1.0);

/// Throws SessionTooShort if the session has fewer than n symbols.
Posterior nb_score(const NgramNBModel& model, const SymbolizedSession& s);

// ---------------------------------------------------------------------------
// Order-k Markov chain mixture

struct MarkovModel {
  int order = 5;
  double alpha = 1.0;
  /// Next-state alphabet is codes 1..alphabet.
  int alphabet = kNumEventTypes;
  /// context -> next-state counts, one table per class (class_index).
  std::array<std::map<GramKey, std::vector<std::uint64_t>>, 2> counts;
  std::array<double, 2> log_prior{};

  /// BOS-padded context key for position t of `symbols`.
  GramKey context_at(std::span<const Token> symbols, std::size_t t) const;

  /// Smoothed log P(next | context). Unseen contexts are uniform.
  double log_prob(Label l, GramKey context, Token next) const;

  double log_likelihood(Label l, std::span<const Token> symbols) const;

  /// order-1 models only: row r is P(. | symbol r+1), alphabet x alphabet.
  Eigen::MatrixXd transition_matrix(Label l) const;
};

/// Throws InsufficientData when a class is empty.
MarkovModel mc_train(const SessionList& train, int order, double alpha = 1.0,
                     int alphabet = kNumEventTypes);

Posterior mc_score(const MarkovModel& model, const SymbolizedSession& s);

// ---------------------------------------------------------------------------
// Versioned JSON documents. Counts are stored, so reloaded models score
// bit-identically.

nlohmann::json to_json(const NgramNBModel& m);
nlohmann::json to_json(const MarkovModel& m);
NgramNBModel nb_from_json(const nlohmann::json& j);
MarkovModel mc_from_json(const nlohmann::json& j);

}  // namespace clickstream
