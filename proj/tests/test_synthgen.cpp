#include <doctest.h>

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

#include "clickstream/corpus.hpp"
#include "clickstream/errors.hpp"
#include "clickstream/synthgen.hpp"
#include "fixtures.hpp"

using namespace clickstream;

namespace {

GeneratorSpec two_symbol_spec() {
  GeneratorSpec spec;
  spec.order = 1;
  spec.min_len = 3;
  spec.max_len = 3;
  spec.prior_buy = 0.3;
  spec.classes[0].length_mean = 3.0;
  spec.classes[1].length_mean = 3.0;
  // Only rows BOS, 1, 2 are reachable; the rest are filler.
  const TransitionRow filler = {1, 0, 0, 0, 0, 0};
  spec.process(Label::Buy).table = {{0.6, 0.4, 0, 0, 0, 0}, {0.1, 0.9, 0, 0, 0, 0},
                                    {0.7, 0.3, 0, 0, 0, 0}, filler, filler, filler, filler};
  spec.process(Label::NoBuy).table = {{0.2, 0.8, 0, 0, 0, 0}, {0.5, 0.5, 0, 0, 0, 0},
                                      {0.25, 0.75, 0, 0, 0, 0}, filler, filler, filler, filler};
  return spec;
}

}  // namespace

TEST_CASE("default spec: shipped config equals the built-in spec") {
  std::ifstream in(std::string(CLICKSTREAM_SOURCE_DIR) + "/configs/default_spec.json");
  REQUIRE(in);
  const auto from_file = generator_spec_from_json(nlohmann::json::parse(in));
  const auto builtin = default_generator_spec();
  CHECK(to_json(from_file) == to_json(builtin));
}

TEST_CASE("default spec: BUY sessions carry more add-to-cart, no buy events") {
  const auto sessions = generate(default_generator_spec(), 4000);
  const auto st = compute_stats(sessions);
  const int add = code(EventType::Add) - 1;
  CHECK(st.buy->event_freq(add) > 2.0 * st.nobuy->event_freq(add));
  CHECK(st.all.event_counts(code(EventType::Buy) - 1) == 0);
  CHECK(st.buy->lengths.mean > st.nobuy->lengths.mean);
}

TEST_CASE("generate: degenerate chain emits only view") {
  GeneratorSpec spec = default_generator_spec();
  for (auto& proc : spec.classes) {
    for (auto& row : proc.table) row = {1, 0, 0, 0, 0, 0};
  }
  for (const auto& s : generate(spec, 50)) {
    for (Token t : s.symbols) CHECK(t == 1);
  }
}

TEST_CASE("generate: prior 1 labels everything BUY, stratified or not") {
  GeneratorSpec spec = default_generator_spec();
  spec.prior_buy = 1.0;
  for (bool stratified : {true, false}) {
    spec.stratified = stratified;
    for (const auto& s : generate(spec, 100)) CHECK(s.label == Label::Buy);
  }
}

TEST_CASE("generate: stratified mode gives exact balance") {
  const auto sessions = generate(default_generator_spec(), 14352);
  const auto c = count_labels(sessions);
  CHECK(c.buy == 7176);
  CHECK(c.nobuy == 7176);
}

TEST_CASE("generate: deterministic in the seed") {
  auto spec = default_generator_spec();
  const auto a = generate(spec, 300);
  CHECK(a == generate(spec, 300));
  spec.seed += 1;
  CHECK_FALSE(a == generate(spec, 300));
}

TEST_CASE("generate: session i does not depend on the batch size") {
  const auto spec = testing::well_mixed_spec(4);
  auto small = spec;
  small.stratified = false;
  const auto a = generate(small, 20);
  const auto b = generate(small, 200);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("generate: lengths stay within bounds and match the law") {
  auto spec = default_generator_spec();
  spec.prior_buy = 0.0;
  const auto sessions = generate(spec, 20000);
  double mean = 0.0;
  for (const auto& s : sessions) {
    CHECK(s.length() >= spec.min_len);
    CHECK(s.length() <= spec.max_len);
    mean += static_cast<double>(s.length());
  }
  mean /= static_cast<double>(sessions.size());
  double expected = 0.0;
  double total = 0.0;
  for (std::size_t l = spec.min_len; l <= spec.max_len; ++l) {
    const double p = std::exp(length_log_pmf(spec, Label::NoBuy, l));
    total += p;
    expected += p * static_cast<double>(l);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  // Truncation at 200 barely moves the mean of 28.
  CHECK(expected == doctest::Approx(28.0).epsilon(1e-3));
  CHECK(mean == doctest::Approx(expected).epsilon(0.02));
  CHECK(std::isinf(length_log_pmf(spec, Label::NoBuy, 9)));
}

TEST_CASE("validate rejects non-stochastic rows and bad bounds") {
  auto spec = default_generator_spec();
  spec.process(Label::Buy).table[2][0] += 0.1;
  CHECK_THROWS_AS(spec.validate(), InvalidSpec);
  CHECK_THROWS_AS(generate(spec, 1), InvalidSpec);
  spec = default_generator_spec();
  spec.process(Label::NoBuy).table[1] = {1.2, -0.2, 0, 0, 0, 0};
  CHECK_THROWS_AS(spec.validate(), InvalidSpec);
  spec = default_generator_spec();
  spec.max_len = 5;
  CHECK_THROWS_AS(spec.validate(), InvalidSpec);
  spec = default_generator_spec();
  spec.process(Label::Buy).table.pop_back();
  CHECK_THROWS_AS(spec.validate(), InvalidSpec);
}

TEST_CASE("bayes_oracle: identical classes give the prior") {
  auto spec = default_generator_spec();
  spec.process(Label::Buy) = spec.process(Label::NoBuy);
  spec.prior_buy = 0.3;
  for (const auto& s : generate(spec, 50)) {
    CHECK(bayes_oracle(spec, s).p_buy == doctest::Approx(0.3).epsilon(1e-12));
  }
}

TEST_CASE("bayes_oracle: matches exhaustive enumeration on the two-symbol toy") {
  const auto spec = two_symbol_spec();
  const auto& tb = spec.process(Label::Buy).table;
  const auto& tn = spec.process(Label::NoBuy).table;
  for (int code = 0; code < 8; ++code) {
    const std::vector<Token> s = {static_cast<Token>(1 + (code >> 2 & 1)),
                                  static_cast<Token>(1 + (code >> 1 & 1)),
                                  static_cast<Token>(1 + (code & 1))};
    // Row index for an order-1 context is the previous code; BOS is row 0.
    const double pb = tb[0][s[0] - 1] * tb[s[0]][s[1] - 1] * tb[s[1]][s[2] - 1];
    const double pn = tn[0][s[0] - 1] * tn[s[0]][s[1] - 1] * tn[s[1]][s[2] - 1];
    const double expect = 0.3 * pb / (0.3 * pb + 0.7 * pn);
    const auto post = bayes_oracle(spec, {"toy", s, {}});
    CHECK(std::abs(post.p_buy - expect) < 1e-9);
  }
}

TEST_CASE("class_log_likelihood sums to one over lengths and sequences") {
  auto spec = two_symbol_spec();
  spec.min_len = 1;
  spec.max_len = 4;
  spec.classes[0].length_mean = 2.0;
  spec.classes[1].length_mean = 2.5;
  for (auto l : {Label::Buy, Label::NoBuy}) {
    double total = 0.0;
    for (std::size_t len = 1; len <= 4; ++len) {
      for (unsigned bits = 0; bits < (1u << len); ++bits) {
        std::vector<Token> s;
        for (std::size_t t = 0; t < len; ++t) s.push_back(static_cast<Token>(1 + (bits >> t & 1)));
        total += std::exp(class_log_likelihood(spec, l, s));
      }
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("context indexing: most recent token least significant, BOS as 0") {
  GeneratorSpec spec;
  spec.order = 2;
  const std::vector<Token> s = {3, 6, 1};
  CHECK(spec.num_contexts() == 49);
  CHECK(spec.context_index(s, 0) == 0);
  CHECK(spec.context_index(s, 1) == 3);
  CHECK(spec.context_index(s, 2) == 3 * 7 + 6);
  CHECK(spec.context_index_of(std::vector<Token>{7, 3}) == 3);
  CHECK_THROWS_AS(spec.context_index_of(std::vector<Token>{3}), InvalidSpec);
}

TEST_CASE("lagged_repeat_spec: copies the lagged symbol at the stated rate") {
  auto spec = lagged_repeat_spec(3, 2, 0.6);
  spec.validate();
  CHECK(spec.order == 3);
  spec.seed = 17;
  const auto sessions = generate(spec, 4000);
  std::array<double, 2> hits3{}, hits2{}, n{};
  std::array<double, 2> hits1{};
  for (const auto& s : sessions) {
    const auto c = *s.label == Label::Buy ? 1 : 0;
    for (std::size_t t = 3; t < s.length(); ++t) {
      hits3[c] += s.symbols[t] == s.symbols[t - 3];
      hits2[c] += s.symbols[t] == s.symbols[t - 2];
      hits1[c] += s.symbols[t] == s.symbols[t - 1];
      n[c] += 1;
    }
  }
  const double copy = 0.6 + 0.4 / 5.0;
  CHECK(hits3[1] / n[1] == doctest::Approx(copy).epsilon(0.03));
  CHECK(hits2[0] / n[0] == doctest::Approx(copy).epsilon(0.03));
  // Adjacent symbols carry no class signal.
  CHECK(hits1[1] / n[1] == doctest::Approx(0.2).epsilon(0.05));
  CHECK(hits1[0] / n[0] == doctest::Approx(0.2).epsilon(0.05));
  CHECK_THROWS_AS(lagged_repeat_spec(0, 2, 0.5), InvalidSpec);
}

TEST_CASE("generator spec JSON: round-trip, default row, missing rows") {
  const auto spec = lagged_repeat_spec(2, 1, 0.5);
  const auto back = generator_spec_from_json(nlohmann::json::parse(to_json(spec).dump()));
  CHECK(back.process(Label::Buy).table == spec.process(Label::Buy).table);
  CHECK(back.order == 2);

  nlohmann::json j = to_json(default_generator_spec());
  auto& rows = j["classes"]["BUY"]["transitions"];
  rows.erase("5");
  CHECK_THROWS_AS(generator_spec_from_json(j), InvalidSpec);
  rows["*"] = {0.5, 0.5, 0, 0, 0, 0};
  const auto filled = generator_spec_from_json(j);
  CHECK(filled.process(Label::Buy).table[5][0] == 0.5);
  j["classes"]["BUY"]["transitions"]["9"] = {1, 0, 0, 0, 0, 0};
  CHECK_THROWS_AS(generator_spec_from_json(j), InvalidSpec);
  j["format"] = "other";
  CHECK_THROWS_AS(generator_spec_from_json(j), InvalidSpec);
}
