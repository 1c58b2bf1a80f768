#include "clickstream/evaluation.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "clickstream/errors.hpp"

namespace clickstream {

std::string_view model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::NB: return "nb";
    case ModelKind::MC: return "mc";
    case ModelKind::LM: return "lm";
    case ModelKind::S2L: return "s2l";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view s) {
  if (s == "nb") return ModelKind::NB;
  if (s == "mc") return ModelKind::MC;
  if (s == "lm") return ModelKind::LM;
  if (s == "s2l") return ModelKind::S2L;
  throw InvalidSpec("unknown model kind '" + std::string(s) + "'");
}

ModelSpec default_model_spec(ModelKind kind, Pooling pooling) {
  ModelSpec spec;
  spec.kind = kind;
  spec.pooling = pooling;
  spec.order = 5;
  if (kind == ModelKind::LM) spec.neural = default_lm_config();
  if (kind == ModelKind::S2L) spec.neural = default_s2l_config(pooling);
  return spec;
}

std::string model_id(const ModelSpec& spec) {
  std::string id(model_kind_name(spec.kind));
  switch (spec.kind) {
    case ModelKind::NB:
    case ModelKind::MC: return id + "-" + std::to_string(spec.order);
    case ModelKind::LM: return id;
    case ModelKind::S2L: return id + "-" + std::string(nn::pooling_name(spec.pooling));
  }
  return id;
}

nlohmann::json to_json(const ModelSpec& spec) {
  nlohmann::json j;
  j["model"] = model_kind_name(spec.kind);
  if (is_stochastic(spec.kind)) {
    if (spec.kind == ModelKind::S2L) j["pooling"] = nn::pooling_name(spec.pooling);
    j["hidden"] = spec.neural.hidden;
    j["lr"] = spec.neural.lr;
    j["batch"] = spec.neural.batch;
    j["patience"] = spec.neural.early_stop.patience;
    j["max_epochs"] = spec.neural.early_stop.max_epochs;
  } else {
    j["order"] = spec.order;
    j["alpha"] = spec.alpha;
    if (spec.kind == ModelKind::MC) j["alphabet"] = spec.alphabet;
  }
  return j;
}

ModelSpec model_spec_from_json(const nlohmann::json& j) {
  const auto kind = parse_model_kind(j.at("model").get<std::string>());
  ModelSpec spec = default_model_spec(
      kind, nn::parse_pooling(j.value("pooling", std::string("last"))));
  spec.order = j.value("order", spec.order);
  spec.alpha = j.value("alpha", spec.alpha);
  spec.alphabet = j.value("alphabet", spec.alphabet);
  spec.neural.hidden = j.value("hidden", spec.neural.hidden);
  spec.neural.lr = j.value("lr", spec.neural.lr);
  spec.neural.batch = j.value("batch", spec.neural.batch);
  spec.neural.early_stop.patience = j.value("patience", spec.neural.early_stop.patience);
  spec.neural.early_stop.max_epochs = j.value("max_epochs", spec.neural.early_stop.max_epochs);
  return spec;
}

TrainedModel train_model(const ModelSpec& spec, const Corpus& corpus, std::uint64_t seed,
                         std::vector<nn::TrainLog>* logs) {
  switch (spec.kind) {
    case ModelKind::NB: return nb_train(corpus.train, spec.order, spec.alpha);
    case ModelKind::MC: return mc_train(corpus.train, spec.order, spec.alpha, spec.alphabet);
    case ModelKind::LM: {
      NeuralConfig cfg = spec.neural;
      cfg.seed = seed;
      LMMixtureLogs l;
      auto m = lm_mixture_train(corpus, cfg, &l);
      if (logs) *logs = {l.buy, l.nobuy};
      return m;
    }
    case ModelKind::S2L: {
      NeuralConfig cfg = spec.neural;
      cfg.seed = seed;
      nn::TrainLog l;
      auto m = s2l_train(corpus.train, corpus.validation, spec.pooling, cfg, &l);
      if (logs) *logs = {l};
      return m;
    }
  }
  throw InvalidSpec("unknown model kind");
}

std::vector<Label> predict(const TrainedModel& model, const SessionList& sessions) {
  std::vector<Label> out;
  out.reserve(sessions.size());
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, NgramNBModel>) {
          for (const auto& s : sessions) out.push_back(nb_score(m, s).predicted());
        } else if constexpr (std::is_same_v<M, MarkovModel>) {
          for (const auto& s : sessions) out.push_back(mc_score(m, s).predicted());
        } else if constexpr (std::is_same_v<M, LMMixtureModel>) {
          for (const auto& p : lm_classify_all(m, sessions)) out.push_back(p.predicted());
        } else {
          for (double score : s2l_scores(m, sessions)) out.push_back(s2l_predict(score));
        }
      },
      model);
  return out;
}

nlohmann::json to_json(const TrainedModel& model) {
  return std::visit([](const auto& m) { return to_json(m); }, model);
}

TrainedModel trained_model_from_json(const nlohmann::json& j) {
  const auto kind = parse_model_kind(j.value("kind", std::string()));
  switch (kind) {
    case ModelKind::NB: return nb_from_json(j);
    case ModelKind::MC: return mc_from_json(j);
    case ModelKind::LM: return lm_from_json(j);
    case ModelKind::S2L: return s2l_from_json(j);
  }
  throw FormatError("unknown model kind");
}

// --- metrics ---------------------------------------------------------------

double ConfusionMatrix::accuracy() const {
  if (total() == 0) throw EmptySplit("accuracy of an empty confusion matrix");
  return static_cast<double>(tp + tn) / static_cast<double>(total());
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& o) {
  tp += o.tp;
  fn += o.fn;
  fp += o.fp;
  tn += o.tn;
  return *this;
}

namespace {

std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ClassMetrics class_metrics(const ConfusionMatrix& cm, Label cls) {
  ClassMetrics m;
  if (cls == Label::Buy) {
    m.precision = ratio(cm.tp, cm.tp + cm.fp);
    m.recall = ratio(cm.tp, cm.tp + cm.fn);
  } else {
    m.precision = ratio(cm.tn, cm.tn + cm.fn);
    m.recall = ratio(cm.tn, cm.tn + cm.fp);
  }
  if (m.precision && m.recall && *m.precision + *m.recall > 0.0) {
    m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
  }
  return m;
}

RunMetrics metrics_from(const ConfusionMatrix& cm) {
  RunMetrics r;
  r.confusion = cm;
  r.accuracy = cm.accuracy();
  r.buy = class_metrics(cm, Label::Buy);
  r.nobuy = class_metrics(cm, Label::NoBuy);
  return r;
}

RunMetrics evaluate_predictions(std::span<const Label> truth, std::span<const Label> predicted) {
  if (truth.size() != predicted.size()) throw ShapeMismatch("truth and predictions differ in size");
  if (truth.empty()) throw EmptySplit("nothing to evaluate");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool actual = truth[i] == Label::Buy;
    const bool said = predicted[i] == Label::Buy;
    if (actual && said) ++cm.tp;
    else if (actual) ++cm.fn;
    else if (said) ++cm.fp;
    else ++cm.tn;
  }
  return metrics_from(cm);
}

RunMetrics evaluate(const TrainedModel& model, const SessionList& test) {
  if (test.empty()) throw EmptySplit("test split is empty");
  std::vector<Label> truth;
  truth.reserve(test.size());
  for (const auto& s : test) {
    if (!s.label) throw InvalidSpec("test session '" + s.id + "' has no label");
    truth.push_back(*s.label);
  }
  const auto pred = predict(model, test);
  return evaluate_predictions(truth, pred);
}

// --- multi-seed ------------------------------------------------------------

std::vector<std::uint64_t> EvalReport::seeds() const {
  std::vector<std::uint64_t> out;
  for (const auto& r : runs) out.push_back(r.seed);
  return out;
}

std::vector<double> EvalReport::accuracies() const {
  std::vector<double> out;
  for (const auto& r : runs) out.push_back(r.metrics.accuracy);
  return out;
}

MeanSd mean_sd(std::span<const double> xs) {
  MeanSd out;
  if (xs.empty()) return out;
  const double n = static_cast<double>(xs.size());
  out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() >= 2) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.sd = std::sqrt(ss / (n - 1.0));
  }
  return out;
}

EvalReport make_report(std::string model, nlohmann::json config, std::vector<RunRecord> runs) {
  EvalReport r;
  r.model = std::move(model);
  r.config = std::move(config);
  r.runs = std::move(runs);
  const auto acc = r.accuracies();
  const auto ms = mean_sd(acc);
  r.mean_accuracy = ms.mean;
  r.sd_accuracy = ms.sd;
  for (const auto& run : r.runs) r.confusion += run.metrics.confusion;
  r.buy = class_metrics(r.confusion, Label::Buy);
  r.nobuy = class_metrics(r.confusion, Label::NoBuy);
  return r;
}

EvalReport multi_seed_eval(const ModelSpec& spec, const Corpus& corpus, const MultiSeedConfig& cfg) {
  if (cfg.runs < 1) throw InvalidSpec("runs must be >= 1");
  if (corpus.test.empty()) throw EmptySplit("test split is empty");
  const int n_runs = is_stochastic(spec.kind) ? cfg.runs : 1;
  std::vector<RunRecord> runs;
  for (int i = 0; i < n_runs; ++i) {
    RunRecord rec;
    rec.seed = cfg.base_seed + static_cast<std::uint64_t>(i);
    const auto start = std::chrono::steady_clock::now();
    std::vector<nn::TrainLog> logs;
    const auto model = train_model(spec, corpus, rec.seed, &logs);
    rec.metrics = evaluate(model, corpus.test);
    if (cfg.timing) {
      rec.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    for (const auto& l : logs) rec.best_epochs.push_back(l.best_epoch);
    runs.push_back(std::move(rec));
  }
  nlohmann::json config = to_json(spec);
  config["base_seed"] = cfg.base_seed;
  config["runs"] = n_runs;
  auto report = make_report(model_id(spec), std::move(config), std::move(runs));
  // Retraining a count model on the same split reproduces it exactly.
  if (!is_stochastic(spec.kind)) report.sd_accuracy = 0.0;
  return report;
}

namespace {

nlohmann::json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> opt_from(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

nlohmann::json to_json(const ConfusionMatrix& cm) {
  return {{"tp", cm.tp}, {"fn", cm.fn}, {"fp", cm.fp}, {"tn", cm.tn}};
}

ConfusionMatrix confusion_from_json(const nlohmann::json& j) {
  return {j.at("tp").get<std::uint64_t>(), j.at("fn").get<std::uint64_t>(),
          j.at("fp").get<std::uint64_t>(), j.at("tn").get<std::uint64_t>()};
}

nlohmann::json to_json(const ClassMetrics& m) {
  return {{"precision", opt_json(m.precision)},
          {"recall", opt_json(m.recall)},
          {"f1", opt_json(m.f1)}};
}

ClassMetrics class_metrics_from_json(const nlohmann::json& j) {
  return {opt_from(j, "precision"), opt_from(j, "recall"), opt_from(j, "f1")};
}

nlohmann::json to_json(const RunMetrics& m) {
  return {{"accuracy", m.accuracy},
          {"confusion", to_json(m.confusion)},
          {"BUY", to_json(m.buy)},
          {"NOBUY", to_json(m.nobuy)}};
}

RunMetrics run_metrics_from_json(const nlohmann::json& j) {
  RunMetrics m;
  m.accuracy = j.at("accuracy").get<double>();
  m.confusion = confusion_from_json(j.at("confusion"));
  m.buy = class_metrics_from_json(j.at("BUY"));
  m.nobuy = class_metrics_from_json(j.at("NOBUY"));
  return m;
}

}  // namespace

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j;
  j["format"] = "clickstream-eval";
  j["version"] = 1;
  j["model"] = r.model;
  j["config"] = r.config;
  j["seeds"] = r.seeds();
  j["mean_accuracy"] = r.mean_accuracy;
  j["sd_accuracy"] = opt_json(r.sd_accuracy);
  j["confusion"] = to_json(r.confusion);
  j["BUY"] = to_json(r.buy);
  j["NOBUY"] = to_json(r.nobuy);
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& run : r.runs) {
    nlohmann::json rj;
    rj["seed"] = run.seed;
    rj["metrics"] = to_json(run.metrics);
    if (!run.best_epochs.empty()) rj["best_epochs"] = run.best_epochs;
    if (run.wall_seconds) rj["wall_seconds"] = *run.wall_seconds;
    runs.push_back(std::move(rj));
  }
  j["runs"] = std::move(runs);
  return j;
}

EvalReport eval_report_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "clickstream-eval") throw FormatError("not an evaluation report");
  if (j.value("version", 0) != 1) throw FormatError("unsupported report version");
  EvalReport r;
  r.model = j.at("model").get<std::string>();
  r.config = j.at("config");
  r.mean_accuracy = j.at("mean_accuracy").get<double>();
  r.sd_accuracy = opt_from(j, "sd_accuracy");
  r.confusion = confusion_from_json(j.at("confusion"));
  r.buy = class_metrics_from_json(j.at("BUY"));
  r.nobuy = class_metrics_from_json(j.at("NOBUY"));
  for (const auto& rj : j.at("runs")) {
    RunRecord run;
    run.seed = rj.at("seed").get<std::uint64_t>();
    run.metrics = run_metrics_from_json(rj.at("metrics"));
    run.best_epochs = rj.value("best_epochs", std::vector<int>{});
    run.wall_seconds = opt_from(rj, "wall_seconds");
    r.runs.push_back(std::move(run));
  }
  return r;
}

std::string format_table(std::span<const EvalReport> reports) {
  std::size_t width = 5;
  for (const auto& r : reports) width = std::max(width, r.model.size());
  std::ostringstream out;
  out << std::fixed << std::setprecision(3);
  out << std::left << std::setw(static_cast<int>(width)) << "model"
      << "  accuracy          BUY P/R        NOBUY P/R      runs\n";
  auto pr = [](const ClassMetrics& m) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(3);
    if (m.precision) s << *m.precision; else s << "  -  ";
    s << '/';
    if (m.recall) s << *m.recall; else s << "  -  ";
    return s.str();
  };
  for (const auto& r : reports) {
    std::ostringstream acc;
    acc << std::fixed << std::setprecision(3) << r.mean_accuracy;
    if (r.sd_accuracy && r.runs.size() > 1) acc << " (±" << *r.sd_accuracy << ")";
    out << std::left << std::setw(static_cast<int>(width)) << r.model << "  "
        << std::setw(16) << acc.str() << "  " << std::setw(13) << pr(r.buy) << "  "
        << std::setw(13) << pr(r.nobuy) << "  " << r.runs.size() << '\n';
  }
  return out.str();
}

// --- significance ----------------------------------------------------------

std::string_view decision_name(Decision d) {
  switch (d) {
    case Decision::ABetter: return "a_better";
    case Decision::BBetter: return "b_better";
    case Decision::Indistinguishable: return "indistinguishable";
  }
  return "?";
}

namespace {

// Continued fraction for the incomplete beta, modified Lentz.
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw InvalidSpec("incomplete beta needs a, b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  if (x < (a + 1.0) / (a + b + 2.0)) return std::exp(log_front) * beta_cf(a, b, x) / a;
  return 1.0 - std::exp(log_front) * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) throw InvalidSpec("degrees of freedom must be positive");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
  return t > 0 ? 1.0 - tail : tail;
}

Comparison welch_compare(std::span<const double> a, std::span<const double> b, double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) throw InvalidSpec("confidence must be in (0, 1)");
  if (a.empty() || b.empty()) throw EmptySplit("cannot compare an empty accuracy vector");
  Comparison c;
  c.confidence = confidence;
  const auto sa = mean_sd(a);
  const auto sb = mean_sd(b);
  c.mean_a = sa.mean;
  c.mean_b = sb.mean;
  const auto by_mean = [&] {
    if (c.mean_a > c.mean_b) return Decision::ABetter;
    if (c.mean_b > c.mean_a) return Decision::BBetter;
    return Decision::Indistinguishable;
  };
  if (!sa.sd || !sb.sd) {
    c.point_comparison = true;
    c.decision = by_mean();
    return c;
  }
  const double va = *sa.sd * *sa.sd / static_cast<double>(a.size());
  const double vb = *sb.sd * *sb.sd / static_cast<double>(b.size());
  const double se2 = va + vb;
  if (se2 == 0.0) {
    // Both samples constant: any mean difference is exact.
    c.decision = by_mean();
    const double diff = c.mean_a - c.mean_b;
    c.t = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
    c.p_value = diff == 0.0 ? 1.0 : 0.0;
    return c;
  }
  const double t = (c.mean_a - c.mean_b) / std::sqrt(se2);
  const double df = se2 * se2 /
                    (va * va / static_cast<double>(a.size() - 1) +
                     vb * vb / static_cast<double>(b.size() - 1));
  const double p = std::min(1.0, 2.0 * student_t_cdf(-std::abs(t), df));
  c.t = t;
  c.df = df;
  c.p_value = p;
  c.decision = p < 1.0 - confidence ? (t > 0 ? Decision::ABetter : Decision::BBetter)
                                    : Decision::Indistinguishable;
  return c;
}

Comparison compare(const EvalReport& a, const EvalReport& b, double confidence) {
  const auto xa = a.accuracies();
  const auto xb = b.accuracies();
  return welch_compare(xa, xb, confidence);
}

nlohmann::json to_json(const Comparison& c) {
  nlohmann::json j;
  j["decision"] = decision_name(c.decision);
  j["confidence"] = c.confidence;
  j["mean_a"] = c.mean_a;
  j["mean_b"] = c.mean_b;
  j["t"] = c.t && std::isfinite(*c.t) ? nlohmann::json(*c.t) : nlohmann::json(nullptr);
  j["df"] = opt_json(c.df);
  j["p_value"] = opt_json(c.p_value);
  j["point_comparison"] = c.point_comparison;
  return j;
}

}  // namespace clickstream
