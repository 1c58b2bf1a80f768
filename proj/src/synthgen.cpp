#include "clickstream/synthgen.hpp"

#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>

#include "clickstream/errors.hpp"
#include "clickstream/prob_models.hpp"
#include "clickstream/random.hpp"

namespace clickstream {

namespace {

constexpr int kContextBase = kNumEventTypes + 1;

std::size_t digit(Token t) { return t == token::kBos ? 0 : t; }

Token token_of_digit(std::size_t d) {
  return d == 0 ? token::kBos : static_cast<Token>(d);
}

double geometric_p(const GeneratorSpec& spec, Label l) {
  return 1.0 / (spec.process(l).length_mean - static_cast<double>(spec.min_len) + 1.0);
}

std::size_t sample_length(const GeneratorSpec& spec, Label l, Rng& rng) {
  const double p = geometric_p(spec, l);
  if (p >= 1.0 || spec.min_len == spec.max_len) return spec.min_len;
  const double span = static_cast<double>(spec.max_len - spec.min_len + 1);
  const double log_q = std::log1p(-p);
  // Inverse CDF of the truncated geometric.
  const double z = -std::expm1(span * log_q);
  const double u = uniform01(rng);
  const double k = std::floor(std::log1p(-u * z) / log_q);
  const auto len = spec.min_len + static_cast<std::size_t>(std::max(0.0, k));
  return std::min(len, spec.max_len);
}

Token sample_next(const TransitionRow& row, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  int last_positive = 0;
  for (int i = 0; i < kNumEventTypes; ++i) {
    if (row[i] <= 0.0) continue;
    last_positive = i;
    acc += row[i];
    if (u < acc) return static_cast<Token>(i + 1);
  }
  return static_cast<Token>(last_positive + 1);
}

std::string context_key(const GeneratorSpec& spec, std::size_t index) {
  std::vector<Token> ctx(spec.order);
  // Most recent token is the least significant digit.
  for (int j = spec.order - 1; j >= 0; --j) {
    ctx[j] = token_of_digit(index % kContextBase);
    index /= kContextBase;
  }
  std::string s;
  for (Token t : ctx) {
    if (!s.empty()) s += '-';
    s += std::to_string(static_cast<int>(t));
  }
  return s;
}

std::vector<Token> parse_context(const std::string& key) {
  std::vector<Token> out;
  std::size_t start = 0;
  while (true) {
    const auto dash = key.find('-', start);
    const int v = std::stoi(key.substr(start, dash == std::string::npos ? std::string::npos : dash - start));
    if (!(token::is_event(static_cast<Token>(v)) || v == token::kBos)) {
      throw InvalidSpec("bad context token in '" + key + "'");
    }
    out.push_back(static_cast<Token>(v));
    if (dash == std::string::npos) break;
    start = dash + 1;
  }
  return out;
}

}  // namespace

std::size_t GeneratorSpec::num_contexts() const {
  std::size_t n = 1;
  for (int i = 0; i < order; ++i) n *= kContextBase;
  return n;
}

std::size_t GeneratorSpec::context_index(std::span<const Token> symbols, std::size_t t) const {
  std::size_t idx = 0;
  for (int j = order; j >= 1; --j) {
    const auto pos = static_cast<std::ptrdiff_t>(t) - j;
    const Token tok = pos < 0 ? token::kBos : symbols[static_cast<std::size_t>(pos)];
    idx = idx * kContextBase + digit(tok);
  }
  return idx;
}

std::size_t GeneratorSpec::context_index_of(std::span<const Token> context) const {
  if (static_cast<int>(context.size()) != order) throw InvalidSpec("context arity differs from order");
  std::size_t idx = 0;
  for (Token t : context) idx = idx * kContextBase + digit(t);
  return idx;
}

const ClassProcess& GeneratorSpec::process(Label l) const { return classes[class_index(l)]; }
ClassProcess& GeneratorSpec::process(Label l) { return classes[class_index(l)]; }

void GeneratorSpec::validate() const {
  if (order < 1 || order > 6) throw InvalidSpec("order must be in 1..6");
  if (min_len < 1 || max_len < min_len) throw InvalidSpec("need 1 <= min_len <= max_len");
  if (!(prior_buy >= 0.0 && prior_buy <= 1.0)) throw InvalidSpec("prior_buy must be in [0, 1]");
  for (const auto& proc : classes) {
    if (proc.table.size() != num_contexts()) {
      throw InvalidSpec("transition table needs " + std::to_string(num_contexts()) + " rows");
    }
    if (!(proc.length_mean >= static_cast<double>(min_len))) {
      throw InvalidSpec("length_mean must be >= min_len");
    }
    for (std::size_t r = 0; r < proc.table.size(); ++r) {
      double sum = 0.0;
      for (double v : proc.table[r]) {
        if (!(v >= 0.0)) throw InvalidSpec("negative probability in row " + context_key(*this, r));
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw InvalidSpec("row " + context_key(*this, r) + " sums to " + std::to_string(sum));
      }
    }
  }
}

double length_log_pmf(const GeneratorSpec& spec, Label l, std::size_t length) {
  if (length < spec.min_len || length > spec.max_len) {
    return -std::numeric_limits<double>::infinity();
  }
  const double p = geometric_p(spec, l);
  if (p >= 1.0) return length == spec.min_len ? 0.0 : -std::numeric_limits<double>::infinity();
  if (spec.min_len == spec.max_len) return 0.0;
  const double log_q = std::log1p(-p);
  const double span = static_cast<double>(spec.max_len - spec.min_len + 1);
  const double log_z = std::log(-std::expm1(span * log_q));
  return std::log(p) + static_cast<double>(length - spec.min_len) * log_q - log_z;
}

SessionList generate(const GeneratorSpec& spec, std::size_t n_sessions) {
  spec.validate();
  std::vector<Label> labels(n_sessions, Label::NoBuy);
  if (spec.stratified) {
    const auto n_buy = static_cast<std::size_t>(
        std::llround(static_cast<double>(n_sessions) * spec.prior_buy));
    for (std::size_t i = 0; i < n_buy; ++i) labels[i] = Label::Buy;
    Rng order_rng(derive_seed(spec.seed, std::numeric_limits<std::uint64_t>::max() - 1));
    shuffle(labels, order_rng);
  }

  SessionList out;
  out.reserve(n_sessions);
  for (std::size_t i = 0; i < n_sessions; ++i) {
    Rng rng(derive_seed(spec.seed, i));
    Label label = labels[i];
    if (!spec.stratified) label = uniform01(rng) < spec.prior_buy ? Label::Buy : Label::NoBuy;
    const auto& proc = spec.process(label);
    SymbolizedSession s;
    s.id = "synth-" + std::to_string(spec.seed) + "-" + std::to_string(i);
    s.label = label;
    const std::size_t len = sample_length(spec, label, rng);
    s.symbols.reserve(len);
    for (std::size_t t = 0; t < len; ++t) {
      s.symbols.push_back(sample_next(proc.table[spec.context_index(s.symbols, t)], rng));
    }
    out.push_back(std::move(s));
  }
  return out;
}

double class_log_likelihood(const GeneratorSpec& spec, Label l, std::span<const Token> symbols) {
  double ll = length_log_pmf(spec, l, symbols.size());
  const auto& proc = spec.process(l);
  for (std::size_t t = 0; t < symbols.size(); ++t) {
    if (!token::is_event(symbols[t])) throw InvalidSpec("symbol outside the event alphabet");
    ll += std::log(proc.table[spec.context_index(symbols, t)][symbols[t] - 1]);
  }
  return ll;
}

Posterior bayes_oracle(const GeneratorSpec& spec, const SymbolizedSession& s) {
  return map_classify(class_log_likelihood(spec, Label::Buy, s.symbols),
                      class_log_likelihood(spec, Label::NoBuy, s.symbols),
                      std::log(spec.prior_buy), std::log1p(-spec.prior_buy));
}

GeneratorSpec default_generator_spec() {
  GeneratorSpec spec;
  spec.order = 1;
  spec.seed = 7;
  //                     view  detail add   remove buy  click
  auto& nobuy = spec.process(Label::NoBuy);
  nobuy.length_mean = 28.0;
  nobuy.table = {
      {0.45, 0.30, 0.02, 0.00, 0.0, 0.23},  // BOS
      {0.40, 0.35, 0.03, 0.01, 0.0, 0.21},  // view
      {0.35, 0.40, 0.05, 0.01, 0.0, 0.19},  // detail
      {0.40, 0.30, 0.10, 0.05, 0.0, 0.15},  // add
      {0.45, 0.30, 0.05, 0.05, 0.0, 0.15},  // remove
      {0.40, 0.35, 0.03, 0.01, 0.0, 0.21},  // buy (unreachable)
      {0.40, 0.30, 0.03, 0.01, 0.0, 0.26},  // click
  };
  auto& buy = spec.process(Label::Buy);
  buy.length_mean = 46.0;
  buy.table = {
      {0.45, 0.25, 0.05, 0.01, 0.0, 0.24},
      {0.38, 0.28, 0.10, 0.03, 0.0, 0.21},
      {0.30, 0.30, 0.18, 0.04, 0.0, 0.18},
      {0.35, 0.20, 0.20, 0.10, 0.0, 0.15},
      {0.40, 0.25, 0.12, 0.08, 0.0, 0.15},
      {0.38, 0.28, 0.10, 0.03, 0.0, 0.21},
      {0.38, 0.27, 0.08, 0.02, 0.0, 0.25},
  };
  return spec;
}

GeneratorSpec lagged_repeat_spec(int buy_lag, int nobuy_lag, double repeat_prob,
                                 double length_mean) {
  if (buy_lag < 1 || nobuy_lag < 1) throw InvalidSpec("lags must be >= 1");
  if (!(repeat_prob >= 0.0 && repeat_prob <= 1.0)) throw InvalidSpec("repeat_prob in [0, 1]");
  GeneratorSpec spec;
  spec.order = std::max(buy_lag, nobuy_lag);
  const std::size_t n = spec.num_contexts();
  constexpr std::array<int, 5> kActive = {1, 2, 3, 4, 6};
  for (auto l : {Label::NoBuy, Label::Buy}) {
    const int lag = l == Label::Buy ? buy_lag : nobuy_lag;
    auto& proc = spec.process(l);
    proc.length_mean = length_mean;
    proc.table.assign(n, TransitionRow{});
    for (std::size_t idx = 0; idx < n; ++idx) {
      // Token `lag` steps back is digit (lag - 1) counting from the least
      // significant end.
      std::size_t rest = idx;
      for (int j = 1; j < lag; ++j) rest /= kContextBase;
      const std::size_t d = rest % kContextBase;
      TransitionRow row{};
      const bool copyable = d != 0 && d != static_cast<std::size_t>(code(EventType::Buy));
      const double base = (copyable ? 1.0 - repeat_prob : 1.0) / kActive.size();
      for (int a : kActive) row[a - 1] = base;
      if (copyable) row[d - 1] += repeat_prob;
      proc.table[idx] = row;
    }
  }
  return spec;
}

nlohmann::json to_json(const GeneratorSpec& spec) {
  nlohmann::json j;
  j["format"] = "clickstream-generator";
  j["version"] = 1;
  j["order"] = spec.order;
  j["min_len"] = spec.min_len;
  j["max_len"] = spec.max_len;
  j["prior_buy"] = spec.prior_buy;
  j["stratified"] = spec.stratified;
  j["seed"] = spec.seed;
  for (auto l : {Label::Buy, Label::NoBuy}) {
    const auto& proc = spec.process(l);
    nlohmann::json c;
    c["length_mean"] = proc.length_mean;
    nlohmann::json rows = nlohmann::json::object();
    for (std::size_t r = 0; r < proc.table.size(); ++r) rows[context_key(spec, r)] = proc.table[r];
    c["transitions"] = std::move(rows);
    j["classes"][std::string(label_name(l))] = std::move(c);
  }
  return j;
}

GeneratorSpec generator_spec_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "clickstream-generator") throw InvalidSpec("not a generator spec");
  if (j.value("version", 0) != 1) throw InvalidSpec("unsupported generator spec version");
  GeneratorSpec spec;
  spec.order = j.at("order").get<int>();
  if (spec.order < 1 || spec.order > 6) throw InvalidSpec("order must be in 1..6");
  spec.min_len = j.value("min_len", spec.min_len);
  spec.max_len = j.value("max_len", spec.max_len);
  spec.prior_buy = j.value("prior_buy", spec.prior_buy);
  spec.stratified = j.value("stratified", spec.stratified);
  spec.seed = j.value("seed", spec.seed);
  for (auto l : {Label::Buy, Label::NoBuy}) {
    const auto& c = j.at("classes").at(std::string(label_name(l)));
    auto& proc = spec.process(l);
    proc.length_mean = c.at("length_mean").get<double>();
    const auto& rows = c.at("transitions");
    std::optional<TransitionRow> fallback;
    if (rows.contains("*")) fallback = rows.at("*").get<TransitionRow>();
    std::vector<bool> seen(spec.num_contexts(), false);
    proc.table.assign(spec.num_contexts(), TransitionRow{});
    for (const auto& [key, row] : rows.items()) {
      if (key == "*") continue;
      const auto idx = spec.context_index_of(parse_context(key));
      proc.table[idx] = row.get<TransitionRow>();
      seen[idx] = true;
    }
    for (std::size_t r = 0; r < seen.size(); ++r) {
      if (seen[r]) continue;
      if (!fallback) {
        throw InvalidSpec("no row for context " + context_key(spec, r) + " and no '*' default");
      }
      proc.table[r] = *fallback;
    }
  }
  spec.validate();
  return spec;
}

}  // namespace clickstream
