#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "clickstream/neural_classifiers.hpp"
#include "clickstream/prob_models.hpp"
#include "clickstream/types.hpp"

namespace clickstream {

enum class ModelKind { NB, MC, LM, S2L };

std::string_view model_kind_name(ModelKind k);
ModelKind parse_model_kind(std::string_view s);

/// NB and MC are deterministic given the training split.
inline bool is_stochastic(ModelKind k) { return k == ModelKind::LM || k == ModelKind::S2L; }

struct ModelSpec {
  ModelKind kind = ModelKind::MC;
  /// n-gram length for NB, chain order for MC.
  int order = 5;
  double alpha = 1.0;
  int alphabet = kNumEventTypes;
  Pooling pooling = Pooling::Last;
  NeuralConfig neural;
};

/// Spec with the default hyperparameters for `kind`.
ModelSpec default_model_spec(ModelKind kind, Pooling pooling = Pooling::Last);

/// Short label such as "nb-1", "mc-5", "lm", "s2l-last".
std::string model_id(const ModelSpec& spec);

nlohmann::json to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const nlohmann::json& j);

using TrainedModel = std::variant<NgramNBModel, MarkovModel, LMMixtureModel, S2LModel>;

/// Trains on corpus.train (neural kinds early-stop on corpus.validation).
/// The neural seed is `seed`; NB/MC ignore it.
TrainedModel train_model(const ModelSpec& spec, const Corpus& corpus, std::uint64_t seed,
                         std::vector<nn::TrainLog>* logs = nullptr);

std::vector<Label> predict(const TrainedModel& model, const SessionList& sessions);

nlohmann::json to_json(const TrainedModel& model);
TrainedModel trained_model_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Metrics

/// BUY is the positive class.
struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t fn = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const { return tp + fn + fp + tn; }
  double accuracy() const;
  ConfusionMatrix& operator+=(const ConfusionMatrix& o);
  bool operator==(const ConfusionMatrix&) const = default;
};

/// Absent when the denominator is zero.
struct ClassMetrics {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
};

ClassMetrics class_metrics(const ConfusionMatrix& cm, Label cls);

struct RunMetrics {
  ConfusionMatrix confusion;
  double accuracy = 0.0;
  ClassMetrics buy;
  ClassMetrics nobuy;
};

RunMetrics metrics_from(const ConfusionMatrix& cm);

/// Throws EmptySplit on empty input, ShapeMismatch on unequal lengths.
RunMetrics evaluate_predictions(std::span<const Label> truth, std::span<const Label> predicted);

/// Scores `test` with `model`. Throws EmptySplit, or InvalidSpec if a
/// session is unlabeled.
RunMetrics evaluate(const TrainedModel& model, const SessionList& test);

// ---------------------------------------------------------------------------
// Multi-seed protocol

struct RunRecord {
  std::uint64_t seed = 0;
  RunMetrics metrics;
  std::optional<double> wall_seconds;
  /// Best validation epoch per trained network (LM: BUY then NOBUY).
  std::vector<int> best_epochs;
};

struct EvalReport {
  std::string model;
  nlohmann::json config;
  std::vector<RunRecord> runs;
  double mean_accuracy = 0.0;
  /// Sample sd (n - 1); absent with fewer than two stochastic runs.
  std::optional<double> sd_accuracy;
  /// Summed over runs.
  ConfusionMatrix confusion;
  ClassMetrics buy;
  ClassMetrics nobuy;

  std::vector<std::uint64_t> seeds() const;
  std::vector<double> accuracies() const;
};

struct MeanSd {
  double mean = 0.0;
  std::optional<double> sd;
};

MeanSd mean_sd(std::span<const double> xs);

/// Fills the aggregate fields from `runs`.
EvalReport make_report(std::string model, nlohmann::json config, std::vector<RunRecord> runs);

struct MultiSeedConfig {
  int runs = 10;
  std::uint64_t base_seed = 0;
  bool timing = false;
};

/// Seeds base, base + 1, ...; NB and MC run once and report sd 0.
EvalReport multi_seed_eval(const ModelSpec& spec, const Corpus& corpus, const MultiSeedConfig& cfg);

nlohmann::json to_json(const EvalReport& r);
EvalReport eval_report_from_json(const nlohmann::json& j);

/// Accuracy table, one row per report: "model  0.932 (±0.002)  runs".
std::string format_table(std::span<const EvalReport> reports);

// ---------------------------------------------------------------------------
// Significance

enum class Decision { ABetter, BBetter, Indistinguishable };

std::string_view decision_name(Decision d);

struct Comparison {
  Decision decision = Decision::Indistinguishable;
  double confidence = 0.99;
  double mean_a = 0.0;
  double mean_b = 0.0;
  std::optional<double> t;
  std::optional<double> df;
  /// Two-sided.
  std::optional<double> p_value;
  /// Set when either side has fewer than two runs.
  bool point_comparison = false;
};

/// Welch two-sample t-test, two-sided at level 1 - confidence.
Comparison welch_compare(std::span<const double> a, std::span<const double> b,
                         double confidence = 0.99);
Comparison compare(const EvalReport& a, const EvalReport& b, double confidence = 0.99);

nlohmann::json to_json(const Comparison& c);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double df);

}  // namespace clickstream
