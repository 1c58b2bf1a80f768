#include <doctest.h>

#include <cmath>

#include "clickstream/corpus.hpp"
#include "clickstream/errors.hpp"
#include "clickstream/evaluation.hpp"
#include "clickstream/random.hpp"
#include "fixtures.hpp"

using namespace clickstream;

namespace {

// Per-seed accuracy fixtures. Expected Welch statistics are frozen from
// scipy.stats.ttest_ind(a, b, equal_var=False).
const std::vector<double> kA = {0.900, 0.910, 0.920, 0.890, 0.930,
                                0.900, 0.910, 0.920, 0.900, 0.910};
const std::vector<double> kB = {0.892, 0.898, 0.908, 0.878, 0.918,
                                0.884, 0.898, 0.908, 0.888, 0.898};
const std::vector<double> kC = {0.886, 0.892, 0.902, 0.872, 0.912,
                                0.878, 0.892, 0.902, 0.882, 0.892};
const std::vector<double> kD = {0.95, 0.80, 0.99, 0.70, 0.85, 0.91};

RunRecord run_with(std::uint64_t seed, std::uint64_t correct, std::uint64_t total) {
  // Balanced split, errors spread over both classes.
  ConfusionMatrix cm;
  const auto wrong = total - correct;
  cm.tp = correct / 2;
  cm.tn = correct - cm.tp;
  cm.fn = wrong / 2;
  cm.fp = wrong - cm.fn;
  return {seed, metrics_from(cm), std::nullopt, {}};
}

Corpus small_corpus(std::uint64_t seed, std::size_t n = 400) {
  PrepConfig cfg;
  cfg.seed = seed;
  return prepare(generate(testing::well_mixed_spec(seed), n), cfg);
}

}  // namespace

// --- metrics ---------------------------------------------------------------

TEST_CASE("perfect predictor") {
  const std::vector<Label> truth = {Label::Buy, Label::NoBuy, Label::Buy, Label::NoBuy};
  const auto m = evaluate_predictions(truth, truth);
  CHECK(m.accuracy == 1.0);
  CHECK(m.buy.recall == 1.0);
  CHECK(m.nobuy.recall == 1.0);
  CHECK(m.buy.f1 == 1.0);
}

TEST_CASE("constant NOBUY predictor on a balanced split") {
  const std::vector<Label> truth = {Label::Buy, Label::NoBuy, Label::Buy, Label::NoBuy};
  const std::vector<Label> pred(4, Label::NoBuy);
  const auto m = evaluate_predictions(truth, pred);
  CHECK(m.accuracy == 0.5);
  CHECK(m.buy.recall == 0.0);
  CHECK_FALSE(m.buy.precision.has_value());
  CHECK_FALSE(m.buy.f1.has_value());
  CHECK(m.nobuy.recall == 1.0);
  CHECK(m.nobuy.precision == 0.5);
}

TEST_CASE("hand-built four-session confusion matrix") {
  const std::vector<Label> truth = {Label::Buy, Label::Buy, Label::NoBuy, Label::NoBuy};
  const std::vector<Label> pred = {Label::Buy, Label::NoBuy, Label::Buy, Label::NoBuy};
  const auto m = evaluate_predictions(truth, pred);
  CHECK(m.confusion == ConfusionMatrix{1, 1, 1, 1});
  CHECK(m.accuracy == 0.5);
  CHECK(m.buy.precision == 0.5);
  CHECK(m.buy.recall == 0.5);
  CHECK(m.buy.f1 == 0.5);

  const std::vector<Label> pred2 = {Label::Buy, Label::Buy, Label::Buy, Label::NoBuy};
  const auto m2 = evaluate_predictions(truth, pred2);
  CHECK(m2.confusion == ConfusionMatrix{2, 0, 1, 1});
  CHECK(m2.accuracy == 0.75);
  CHECK(*m2.buy.precision == doctest::Approx(2.0 / 3.0));
  CHECK(m2.buy.recall == 1.0);
  CHECK(*m2.buy.f1 == doctest::Approx(0.8));
  CHECK(m2.nobuy.precision == 1.0);
  CHECK(m2.nobuy.recall == 0.5);
}

TEST_CASE("accuracy equals (TP + TN) / total") {
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    std::vector<Label> t, p;
    const auto n = 1 + uniform_index(rng, 50);
    for (std::size_t k = 0; k < n; ++k) {
      t.push_back(uniform01(rng) < 0.5 ? Label::Buy : Label::NoBuy);
      p.push_back(uniform01(rng) < 0.5 ? Label::Buy : Label::NoBuy);
    }
    const auto m = evaluate_predictions(t, p);
    CHECK(m.accuracy == static_cast<double>(m.confusion.tp + m.confusion.tn) /
                            static_cast<double>(m.confusion.total()));
    CHECK(m.confusion.total() == n);
  }
}

TEST_CASE("coin-flip predictor on 10k balanced sessions scores 0.5 +- 0.02") {
  Rng rng(77);
  std::vector<Label> t, p;
  for (int i = 0; i < 10000; ++i) {
    t.push_back(i % 2 ? Label::Buy : Label::NoBuy);
    p.push_back(uniform01(rng) < 0.5 ? Label::Buy : Label::NoBuy);
  }
  CHECK(std::abs(evaluate_predictions(t, p).accuracy - 0.5) < 0.02);
}

TEST_CASE("metric errors") {
  CHECK_THROWS_AS(evaluate_predictions({}, {}), EmptySplit);
  const std::vector<Label> one = {Label::Buy};
  CHECK_THROWS_AS(evaluate_predictions(one, {}), ShapeMismatch);
  const auto model = train_model(default_model_spec(ModelKind::MC), small_corpus(1), 0);
  CHECK_THROWS_AS(evaluate(model, {}), EmptySplit);
  CHECK_THROWS_AS(evaluate(model, {{"x", {1, 2}, std::nullopt}}), InvalidSpec);
}

// --- aggregation -----------------------------------------------------------

TEST_CASE("ten hand-set accuracies 0.90 .. 0.99") {
  std::vector<RunRecord> runs;
  for (std::uint64_t i = 0; i < 10; ++i) runs.push_back(run_with(100 + i, 90 + i, 100));
  const auto r = make_report("toy", {}, runs);
  CHECK(r.mean_accuracy == doctest::Approx(0.945).epsilon(1e-14));
  // sqrt(sum_k (k - 4.5)^2 / 9) / 100 = sqrt(82.5 / 9) / 100
  REQUIRE(r.sd_accuracy);
  CHECK(*r.sd_accuracy == doctest::Approx(std::sqrt(82.5 / 9.0) / 100.0).epsilon(1e-12));
  CHECK(r.confusion.total() == 1000);
  CHECK(r.seeds().front() == 100);
}

TEST_CASE("mean_sd") {
  const std::vector<double> one = {0.7};
  CHECK(mean_sd(one).mean == 0.7);
  CHECK_FALSE(mean_sd(one).sd.has_value());
  const std::vector<double> same(5, 0.8);
  CHECK(*mean_sd(same).sd == 0.0);
  CHECK(mean_sd(kA).mean == doctest::Approx(0.909));
  CHECK(*mean_sd(kA).sd == doctest::Approx(0.011972189997378658).epsilon(1e-12));
}

TEST_CASE("multi_seed_eval: deterministic models run once with sd 0") {
  const auto corpus = small_corpus(3);
  for (auto kind : {ModelKind::NB, ModelKind::MC}) {
    const auto r = multi_seed_eval(default_model_spec(kind), corpus, {10, 5, false});
    CHECK(r.runs.size() == 1);
    REQUIRE(r.sd_accuracy);
    CHECK(*r.sd_accuracy == 0.0);
    CHECK(r.runs[0].seed == 5);
  }
}

TEST_CASE("multi_seed_eval: seed schedule and reproducibility for neural models") {
  const auto corpus = small_corpus(4, 200);
  auto spec = default_model_spec(ModelKind::S2L, Pooling::Avg);
  spec.neural.hidden = 4;
  spec.neural.early_stop.max_epochs = 2;
  const MultiSeedConfig cfg{3, 40, false};
  const auto a = multi_seed_eval(spec, corpus, cfg);
  const auto b = multi_seed_eval(spec, corpus, cfg);
  CHECK(a.seeds() == std::vector<std::uint64_t>{40, 41, 42});
  CHECK(to_json(a).dump() == to_json(b).dump());
  CHECK(a.sd_accuracy.has_value());
  CHECK_FALSE(a.runs[0].wall_seconds.has_value());
  CHECK(a.runs[0].best_epochs.size() == 1);
}

TEST_CASE("report JSON round-trips losslessly") {
  std::vector<RunRecord> runs;
  for (std::uint64_t i = 0; i < 4; ++i) runs.push_back(run_with(i, 61 + 7 * i, 97));
  runs[2].wall_seconds = 1.0 / 3.0;
  runs[1].best_epochs = {4, 9};
  // A run with an undefined precision.
  runs.push_back({9, metrics_from(ConfusionMatrix{0, 5, 0, 5}), std::nullopt, {}});
  const auto r = make_report("mc-5", {{"order", 5}}, runs);
  const auto j = to_json(r);
  const auto back = eval_report_from_json(nlohmann::json::parse(j.dump()));
  CHECK(to_json(back) == j);
  CHECK(back.runs[2].wall_seconds == 1.0 / 3.0);
  CHECK(back.sd_accuracy == r.sd_accuracy);
  CHECK_FALSE(back.runs[4].metrics.buy.precision.has_value());
}

TEST_CASE("format_table prints mean and sd") {
  std::vector<RunRecord> runs;
  for (std::uint64_t i = 0; i < 10; ++i) runs.push_back(run_with(i, 90 + i, 100));
  const EvalReport reports[] = {make_report("s2l-last", {}, runs),
                                make_report("nb-5", {}, {run_with(0, 80, 100)})};
  const auto table = format_table(reports);
  CHECK(table.find("s2l-last  0.945 (±0.030)") != std::string::npos);
  CHECK(table.find("nb-5      0.800 ") != std::string::npos);
}

// --- significance ----------------------------------------------------------

TEST_CASE("student t CDF and incomplete beta against frozen values") {
  CHECK(student_t_cdf(2.0, 5.0) == doctest::Approx(0.9490302605850709).epsilon(1e-12));
  CHECK(student_t_cdf(-1.3, 17.5) == doctest::Approx(0.10523188448851285).epsilon(1e-12));
  CHECK(student_t_cdf(0.5, 1.0) == doctest::Approx(0.6475836176504333).epsilon(1e-12));
  CHECK(student_t_cdf(3.7, 40.0) == doctest::Approx(0.9996757360398613).epsilon(1e-12));
  CHECK(student_t_cdf(0.0, 3.0) == 0.5);
  CHECK(incomplete_beta(2.5, 0.5, 0.3) == doctest::Approx(0.018927124071945658).epsilon(1e-12));
  CHECK(incomplete_beta(0.5, 7, 0.9) == doctest::Approx(0.9999999780702157).epsilon(1e-12));
  CHECK(incomplete_beta(10, 3, 0.8) == doctest::Approx(0.5583457484800002).epsilon(1e-12));
}

TEST_CASE("welch: p near 0.04 is indistinguishable at 99% but not at 95%") {
  const auto c = welch_compare(kA, kB, 0.99);
  CHECK(*c.t == doctest::Approx(2.227490776815097).epsilon(1e-12));
  CHECK(*c.df == doctest::Approx(17.99729877389659).epsilon(1e-12));
  CHECK(*c.p_value == doctest::Approx(0.03891443963409009).epsilon(1e-10));
  CHECK(c.decision == Decision::Indistinguishable);
  CHECK(welch_compare(kA, kB, 0.95).decision == Decision::ABetter);
}

TEST_CASE("welch: p near 0.004 separates at 99%") {
  const auto c = welch_compare(kA, kC, 0.99);
  CHECK(*c.p_value == doctest::Approx(0.00363526439469594).epsilon(1e-10));
  CHECK(c.decision == Decision::ABetter);
  CHECK(welch_compare(kC, kA, 0.99).decision == Decision::BBetter);
}

TEST_CASE("welch: unequal sizes and variances") {
  const auto c = welch_compare(kA, kD, 0.99);
  CHECK(*c.t == doctest::Approx(0.9715057962775265).epsilon(1e-12));
  CHECK(*c.df == doctest::Approx(5.07618743480486).epsilon(1e-12));
  CHECK(*c.p_value == doctest::Approx(0.3752818188629253).epsilon(1e-10));
  CHECK(c.decision == Decision::Indistinguishable);
}

TEST_CASE("welch: identical and disjoint vectors") {
  CHECK(welch_compare(kA, kA).decision == Decision::Indistinguishable);
  const std::vector<double> hi(10, 0.99), lo(10, 0.50);
  const auto c = welch_compare(hi, lo);
  CHECK(c.decision == Decision::ABetter);
  CHECK(*c.p_value == 0.0);
  CHECK(welch_compare(hi, hi).decision == Decision::Indistinguishable);
}

TEST_CASE("compare: decision mirrors under swapping") {
  const std::vector<std::vector<double>> all = {kA, kB, kC, kD};
  for (const auto& a : all) {
    for (const auto& b : all) {
      const auto ab = welch_compare(a, b).decision;
      const auto ba = welch_compare(b, a).decision;
      if (ab == Decision::ABetter) CHECK(ba == Decision::BBetter);
      if (ab == Decision::BBetter) CHECK(ba == Decision::ABetter);
      if (ab == Decision::Indistinguishable) CHECK(ba == Decision::Indistinguishable);
    }
  }
}

TEST_CASE("compare: single-run reports fall back to a flagged point comparison") {
  const auto a = make_report("nb-5", {}, {run_with(0, 80, 100)});
  std::vector<RunRecord> runs;
  for (std::uint64_t i = 0; i < 10; ++i) runs.push_back(run_with(i, 90 + i, 100));
  const auto b = make_report("s2l", {}, runs);
  const auto c = compare(a, b);
  CHECK(c.point_comparison);
  CHECK(c.decision == Decision::BBetter);
  CHECK_FALSE(c.p_value.has_value());
  CHECK(to_json(c)["decision"] == "b_better");
}

TEST_CASE("model specs and checkpoints round-trip") {
  auto spec = default_model_spec(ModelKind::S2L, Pooling::Avg);
  CHECK(spec.neural.hidden == 80);
  CHECK(spec.neural.lr == 0.01);
  CHECK(model_id(spec) == "s2l-avg");
  const auto back = model_spec_from_json(to_json(spec));
  CHECK(to_json(back) == to_json(spec));
  CHECK(default_model_spec(ModelKind::S2L, Pooling::Last).neural.hidden == 20);
  CHECK(default_model_spec(ModelKind::NB).order == 5);
  CHECK(model_id(default_model_spec(ModelKind::MC)) == "mc-5");
  CHECK_THROWS_AS(parse_model_kind("svm"), InvalidSpec);

  const auto corpus = small_corpus(8);
  const auto model = train_model(default_model_spec(ModelKind::NB), corpus, 0);
  const auto reloaded = trained_model_from_json(nlohmann::json::parse(to_json(model).dump()));
  CHECK(predict(reloaded, corpus.test) == predict(model, corpus.test));
}
