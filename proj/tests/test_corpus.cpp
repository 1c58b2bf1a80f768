#include <doctest.h>

#include <algorithm>
#include <set>

#include "clickstream/corpus.hpp"
#include "clickstream/errors.hpp"
#include "clickstream/prob_models.hpp"
#include "clickstream/random.hpp"
#include "clickstream/synthgen.hpp"
#include "fixtures.hpp"

using namespace clickstream;

namespace {

SymbolizedSession session(std::string id, std::size_t len, Label label, Token fill = 1) {
  SymbolizedSession s{std::move(id), std::vector<Token>(len, fill), label};
  if (label == Label::Buy) s.symbols.back() = 5;
  return s;
}

SessionList many(Label label, std::size_t n, std::size_t len, const std::string& prefix) {
  SessionList out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(session(prefix + std::to_string(i), len, label));
  }
  return out;
}

std::set<std::string> ids(const SessionList& ss) {
  std::set<std::string> out;
  for (const auto& s : ss) out.insert(s.id);
  return out;
}

}  // namespace

TEST_CASE("cut_before_first_buy") {
  const auto cut = cut_before_first_buy({"a", {1, 2, 3, 5, 1, 5}, Label::Buy});
  CHECK(cut.symbols == std::vector<Token>{1, 2, 3});
  CHECK(cut.label == Label::Buy);
  const SymbolizedSession nobuy{"b", {1, 2, 1}, Label::NoBuy};
  CHECK(cut_before_first_buy(nobuy) == nobuy);
  CHECK(cut_before_first_buy({"c", {5, 1, 2}, Label::Buy}).symbols.empty());
}

TEST_CASE("split_sizes: floor, floor, remainder") {
  const auto s = split_sizes(10, {});
  CHECK(s.train == 7);
  CHECK(s.validation == 1);
  CHECK(s.test == 2);
  const auto big = split_sizes(7176, {});
  CHECK(big.train == 5023);
  CHECK(big.validation == 1076);
  CHECK(big.test == 1077);
  CHECK(split_sizes(0, {}).train == 0);
}

TEST_CASE("prepare: 10 + 10 sessions split (7, 1, 2) per class") {
  SessionList in = many(Label::Buy, 10, 12, "b");
  const auto nb = many(Label::NoBuy, 10, 12, "n");
  in.insert(in.end(), nb.begin(), nb.end());
  PrepConfig cfg;
  cfg.seed = 3;
  const auto c = prepare(in, cfg);
  CHECK(c.train_counts().buy == 7);
  CHECK(c.train_counts().nobuy == 7);
  CHECK(c.validation_counts().buy == 1);
  CHECK(c.validation_counts().nobuy == 1);
  CHECK(c.test_counts().buy == 2);
  CHECK(c.test_counts().nobuy == 2);
}

TEST_CASE("prepare: filters, cuts, balances, and keeps splits disjoint") {
  SessionList in;
  in.push_back(session("short", 9, Label::NoBuy));
  in.push_back(session("long", 201, Label::NoBuy));
  in.push_back(session("edge-lo", 10, Label::NoBuy));
  in.push_back(session("edge-hi", 200, Label::NoBuy));
  // Cut leaves 3 symbols: dropped by the re-filter.
  in.push_back({"early-buy", {1, 1, 1, 5, 1, 1, 1, 1, 1, 1, 1, 1}, Label::Buy});
  for (int i = 0; i < 30; ++i) in.push_back(session("b" + std::to_string(i), 15, Label::Buy));
  for (int i = 0; i < 50; ++i) in.push_back(session("n" + std::to_string(i), 15, Label::NoBuy));

  PrepConfig cfg;
  cfg.seed = 11;
  const auto c = prepare(in, cfg);
  const auto& log = c.prep_log;
  CHECK(log.input_total == in.size());
  CHECK(log.dropped_short == 1);
  CHECK(log.dropped_long == 1);
  CHECK(log.cut == 31);
  CHECK(log.dropped_after_cut == 1);
  // 30 BUY survive (14-symbol prefixes), 52 NOBUY downsampled to 30.
  CHECK(log.downsampled == 22);

  SessionList all = c.train;
  all.insert(all.end(), c.validation.begin(), c.validation.end());
  all.insert(all.end(), c.test.begin(), c.test.end());
  CHECK(all.size() == 60);
  CHECK(ids(all).size() == 60);
  CHECK(count_labels(all).buy == count_labels(all).nobuy);
  for (const auto& s : all) {
    CHECK(s.length() >= 10);
    CHECK(s.length() <= 200);
    CHECK(std::find(s.symbols.begin(), s.symbols.end(), 5) == s.symbols.end());
  }
}

TEST_CASE("prepare: deterministic given the seed, sensitive to it") {
  SessionList in = many(Label::Buy, 40, 12, "b");
  const auto nb = many(Label::NoBuy, 90, 12, "n");
  in.insert(in.end(), nb.begin(), nb.end());
  PrepConfig cfg;
  cfg.seed = 5;
  const auto a = prepare(in, cfg);
  const auto b = prepare(in, cfg);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  cfg.seed = 6;
  const auto c = prepare(in, cfg);
  CHECK(ids(a.train) != ids(c.train));
}

TEST_CASE("prepare: an empty class is insufficient data") {
  CHECK_THROWS_AS(prepare(many(Label::NoBuy, 20, 12, "n"), PrepConfig{}), InsufficientData);
  SessionList in = many(Label::NoBuy, 20, 12, "n");
  in.push_back(session("b", 3, Label::Buy));
  CHECK_THROWS_AS(prepare(in, PrepConfig{}), InsufficientData);
}

TEST_CASE("PrepConfig validation") {
  PrepConfig cfg;
  cfg.min_len = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidSpec);
  cfg = {};
  cfg.max_len = 5;
  CHECK_THROWS_AS(cfg.validate(), InvalidSpec);
  cfg = {};
  cfg.split.test = 0.2;
  CHECK_THROWS_AS(cfg.validate(), InvalidSpec);
}

TEST_CASE("nearest-rank percentiles") {
  const std::vector<std::size_t> v = {15, 20, 35, 40, 50};
  CHECK(nearest_rank_percentile(v, 0) == 15);
  CHECK(nearest_rank_percentile(v, 30) == 20);
  CHECK(nearest_rank_percentile(v, 40) == 20);
  CHECK(nearest_rank_percentile(v, 50) == 35);
  CHECK(nearest_rank_percentile(v, 100) == 50);
}

TEST_CASE("compute_stats: single session") {
  const auto st = compute_stats({{"a", {1, 1, 2}, Label::NoBuy}});
  for (auto p : st.all.lengths.percentiles) CHECK(p == 3);
  CHECK(st.all.lengths.mean == 3.0);
  CHECK(st.all.lengths.sd == 0.0);
  CHECK(st.all.transitions(0, 0) == doctest::Approx(0.5));
  CHECK(st.all.transitions(0, 1) == doctest::Approx(0.5));
  CHECK(st.all.empty_rows[1]);
  CHECK(st.all.transitions.row(1).isZero());
  CHECK_FALSE(st.buy.has_value());
  CHECK_FALSE(st.transition_diff.has_value());
}

TEST_CASE("compute_stats: per-label transitions and their difference") {
  const auto st = compute_stats({{"a", {1, 2}, Label::Buy},
                                 {"b", {1, 2}, Label::Buy},
                                 {"c", {1, 1, 6}, Label::NoBuy}});
  REQUIRE(st.buy);
  REQUIRE(st.nobuy);
  CHECK(st.buy->transitions(0, 1) == 1.0);
  CHECK(st.nobuy->transitions(0, 0) == 0.5);
  REQUIRE(st.transition_diff);
  CHECK((*st.transition_diff)(0, 1) == 1.0);
  CHECK((*st.transition_diff)(0, 0) == -0.5);
  CHECK(st.all.lengths.mean == doctest::Approx(7.0 / 3.0));
  // Population sd of {2, 2, 3}.
  CHECK(st.all.lengths.sd == doctest::Approx(std::sqrt(2.0 / 9.0)));
  CHECK(st.all.event_counts(0) == 4);
  CHECK(st.all.event_freq.sum() == doctest::Approx(1.0));
  CHECK_THROWS_AS(compute_stats({}), EmptyInput);
}

TEST_CASE("compute_stats: rows are stochastic or flagged empty") {
  const auto sessions = generate(default_generator_spec(), 500);
  const auto st = compute_stats(sessions);
  for (const auto* ls : {&st.all, &*st.buy, &*st.nobuy}) {
    for (int r = 0; r < kNumEventTypes; ++r) {
      if (ls->empty_rows[r]) {
        CHECK(ls->transitions.row(r).isZero());
      } else {
        CHECK(ls->transitions.row(r).sum() == doctest::Approx(1.0).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("compute_stats: empirical matrix recovers the generator at 100k events") {
  auto spec = testing::well_mixed_spec(21);
  spec.prior_buy = 0.0;
  const auto sessions = testing::take_events(generate(spec, 6000), 100'000);
  REQUIRE(testing::count_events(sessions) >= 100'000);
  const auto st = compute_stats(sessions);
  const auto& truth = spec.process(Label::NoBuy).table;
  double worst = 0.0;
  for (int r = 0; r < kNumEventTypes; ++r) {
    if (r == code(EventType::Buy) - 1) continue;
    const std::vector<Token> ctx{static_cast<Token>(r + 1)};
    const auto& row = truth[spec.context_index_of(ctx)];
    for (int c = 0; c < kNumEventTypes; ++c) {
      worst = std::max(worst, std::abs(st.all.transitions(r, c) - row[c]));
    }
  }
  CHECK(worst < 0.01);
}
