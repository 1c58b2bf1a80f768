#pragma once

#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <span>

#include "clickstream/neural/heads.hpp"
#include "clickstream/neural/trainer.hpp"
#include "clickstream/posterior.hpp"
#include "clickstream/types.hpp"

namespace clickstream {

using nn::Pooling;

struct NeuralConfig {
  int hidden = 80;
  double lr = 0.001;
  int batch = 50;
  nn::EarlyStopConfig early_stop;
  std::uint64_t seed = 0;
};

/// Winning grid points: LM 80/0.001/50, S2L-avg 80/0.01/50, S2L-last 20/0.01/10.
NeuralConfig default_lm_config();
NeuralConfig default_s2l_config(Pooling pooling);

// ---------------------------------------------------------------------------
// Generative LSTM language models, one per class

struct LanguageModel {
  nn::LstmParams<double> params;
};

/// Next-token LM over BOS + session + EOS, trained on `train` and
/// early-stopped on next-token accuracy over `validation`. Throws
/// InsufficientData on an empty split.
LanguageModel lm_train(const SessionList& train, const SessionList& validation,
                       const NeuralConfig& cfg, nn::TrainLog* log = nullptr);

/// sum_t log P(token_t | prefix) over targets s_1..s_n, EOS, starting at BOS.
double lm_sequence_loglik(const LanguageModel& lm, std::span<const Token> symbols);
std::vector<double> lm_sequence_logliks(const LanguageModel& lm, const SessionList& sessions);

/// Fraction of non-PAD next-token targets whose argmax prediction is right.
double lm_token_accuracy(const LanguageModel& lm, const SessionList& sessions);

struct LMMixtureModel {
  LanguageModel buy;
  LanguageModel nobuy;
  std::array<double, 2> log_prior{};
};

struct LMMixtureLogs {
  nn::TrainLog buy;
  nn::TrainLog nobuy;
};

/// Trains the BUY and NOBUY language models on their class's sessions.
LMMixtureModel lm_mixture_train(const Corpus& corpus, const NeuralConfig& cfg,
                                LMMixtureLogs* logs = nullptr);

Posterior lm_classify(const LMMixtureModel& model, const SymbolizedSession& s);
std::vector<Posterior> lm_classify_all(const LMMixtureModel& model, const SessionList& sessions);

// ---------------------------------------------------------------------------
// Discriminative Seq2Label

struct S2LModel {
  nn::LstmParams<double> params;
  Pooling pooling = Pooling::Last;
};

/// Pooled LSTM state -> FC -> sigmoid, binary cross-entropy with BUY = 1.
/// Throws InsufficientData unless both classes appear in `train`.
S2LModel s2l_train(const SessionList& train, const SessionList& validation, Pooling pooling,
                   const NeuralConfig& cfg, nn::TrainLog* log = nullptr);

/// P(BUY | s). Throws EmptySession on an empty session.
double s2l_score(const S2LModel& model, const SymbolizedSession& s);
std::vector<double> s2l_scores(const S2LModel& model, const SessionList& sessions);

/// BUY iff score > 0.5.
inline Label s2l_predict(double score) { return score > 0.5 ? Label::Buy : Label::NoBuy; }

double s2l_accuracy(const S2LModel& model, const SessionList& sessions);

// ---------------------------------------------------------------------------
// Checkpoints: flat parameter arrays plus shape metadata and an
// architecture header. Doubles round-trip exactly.

nlohmann::json to_json(const LMMixtureModel& m);
nlohmann::json to_json(const S2LModel& m);
LMMixtureModel lm_from_json(const nlohmann::json& j);
S2LModel s2l_from_json(const nlohmann::json& j);

nlohmann::json params_to_json(const nn::LstmParams<double>& p);
nn::LstmParams<double> params_from_json(const nlohmann::json& j);

}  // namespace clickstream
