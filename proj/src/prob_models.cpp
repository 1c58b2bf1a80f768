#include "clickstream/prob_models.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <string>

#include "clickstream/errors.hpp"

namespace clickstream {

namespace {

constexpr int kMaxPacked = 15;
constexpr std::array<Label, 2> kLabels = {Label::NoBuy, Label::Buy};

std::string key_string(GramKey key, int n) {
  std::string s;
  for (Token t : unpack_tokens(key, n)) {
    if (!s.empty()) s += '-';
    s += std::to_string(static_cast<int>(t));
  }
  return s;
}

GramKey key_from_string(const std::string& s, int n) {
  std::vector<Token> toks;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto dash = s.find('-', start);
    const auto part = s.substr(start, dash == std::string::npos ? std::string::npos : dash - start);
    const int v = std::stoi(part);
    if (v < 0 || v >= token::kVocabSize) throw FormatError("bad token in key '" + s + "'");
    toks.push_back(static_cast<Token>(v));
    if (dash == std::string::npos) break;
    start = dash + 1;
  }
  if (static_cast<int>(toks.size()) != n) throw FormatError("key '" + s + "' has wrong arity");
  return pack_tokens(toks);
}

void check_model_params(int n, double alpha) {
  if (n < 1 || n > kMaxPacked) throw InvalidSpec("order must be in 1..15");
  if (!(alpha > 0.0)) throw InvalidSpec("alpha must be positive");
}

void check_header(const nlohmann::json& j, const char* kind) {
  if (j.value("format", "") != "clickstream-model" || j.value("kind", "") != kind) {
    throw FormatError(std::string("not a ") + kind + " model document");
  }
  if (j.value("version", 0) != 1) throw FormatError("unsupported model version");
}

}  // namespace

GramKey pack_tokens(std::span<const Token> tokens) {
  if (tokens.size() > kMaxPacked) throw InvalidSpec("gram longer than 15");
  GramKey key = 0;
  for (Token t : tokens) key = (key << 4) | t;
  return key;
}

std::vector<Token> unpack_tokens(GramKey key, int n) {
  std::vector<Token> out(n);
  for (int i = n - 1; i >= 0; --i) {
    out[i] = static_cast<Token>(key & 0xF);
    key >>= 4;
  }
  return out;
}

std::array<double, 2> log_priors_from(const SessionList& train) {
  const auto c = count_labels(train);
  const double total = static_cast<double>(c.total());
  return {std::log(static_cast<double>(c.nobuy) / total),
          std::log(static_cast<double>(c.buy) / total)};
}

// --- Naive Bayes -----------------------------------------------------------

double NgramNBModel::log_prob(Label l, GramKey gram) const {
  const auto c = class_index(l);
  const double denom = static_cast<double>(totals[c]) +
                       alpha * static_cast<double>(counts.size());
  const auto it = counts.find(gram);
  const double num = (it == counts.end() ? 0.0 : static_cast<double>(it->second[c])) + alpha;
  return std::log(num) - std::log(denom);
}

double NgramNBModel::log_likelihood(Label l, std::span<const Token> symbols) const {
  double ll = 0.0;
  for (std::size_t i = 0; i + n <= symbols.size(); ++i) {
    ll += log_prob(l, pack_tokens(symbols.subspan(i, n)));
  }
  return ll;
}

NgramNBModel nb_train(const SessionList& train, int n, double alpha) {
  check_model_params(n, alpha);
  NgramNBModel m;
  m.n = n;
  m.alpha = alpha;
  std::array<bool, 2> has_gram{};
  for (const auto& s : train) {
    if (!s.label) throw FormatError("training session '" + s.id + "' has no label");
    const auto c = class_index(*s.label);
    const std::span<const Token> sym(s.symbols);
    for (std::size_t i = 0; i + n <= sym.size(); ++i) {
      m.counts[pack_tokens(sym.subspan(i, n))][c] += 1;
      m.totals[c] += 1;
      has_gram[c] = true;
    }
  }
  if (!has_gram[0] || !has_gram[1]) {
    throw InsufficientData("each class needs a session of length >= " + std::to_string(n));
  }
  m.log_prior = log_priors_from(train);
  return m;
}

Posterior nb_score(const NgramNBModel& model, const SymbolizedSession& s) {
  if (s.length() < static_cast<std::size_t>(model.n)) {
    throw SessionTooShort("length " + std::to_string(s.length()) + " < n=" +
                          std::to_string(model.n));
  }
  return map_classify(model.log_likelihood(Label::Buy, s.symbols),
                      model.log_likelihood(Label::NoBuy, s.symbols),
                      model.log_prior[1], model.log_prior[0]);
}

// --- Markov chain ----------------------------------------------------------

GramKey MarkovModel::context_at(std::span<const Token> symbols, std::size_t t) const {
  GramKey key = 0;
  for (int j = order; j >= 1; --j) {
    const auto pos = static_cast<std::ptrdiff_t>(t) - j;
    const Token tok = pos < 0 ? token::kBos : symbols[static_cast<std::size_t>(pos)];
    key = (key << 4) | tok;
  }
  return key;
}

double MarkovModel::log_prob(Label l, GramKey context, Token next) const {
  if (next < 1 || next > alphabet) {
    throw InvalidSpec("symbol " + std::to_string(next) + " outside alphabet");
  }
  const auto& table = counts[class_index(l)];
  const auto it = table.find(context);
  if (it == table.end()) return -std::log(static_cast<double>(alphabet));
  std::uint64_t total = 0;
  for (auto c : it->second) total += c;
  return std::log(static_cast<double>(it->second[next - 1]) + alpha) -
         std::log(static_cast<double>(total) + alpha * alphabet);
}

double MarkovModel::log_likelihood(Label l, std::span<const Token> symbols) const {
  double ll = 0.0;
  for (std::size_t t = 0; t < symbols.size(); ++t) {
    ll += log_prob(l, context_at(symbols, t), symbols[t]);
  }
  return ll;
}

Eigen::MatrixXd MarkovModel::transition_matrix(Label l) const {
  if (order != 1) throw InvalidSpec("transition_matrix needs an order-1 model");
  Eigen::MatrixXd m(alphabet, alphabet);
  for (int r = 0; r < alphabet; ++r) {
    const auto ctx = static_cast<GramKey>(r + 1);
    for (int c = 0; c < alphabet; ++c) {
      m(r, c) = std::exp(log_prob(l, ctx, static_cast<Token>(c + 1)));
    }
  }
  return m;
}

MarkovModel mc_train(const SessionList& train, int order, double alpha, int alphabet) {
  check_model_params(order, alpha);
  if (alphabet < 1 || alphabet > kNumEventTypes) throw InvalidSpec("alphabet must be in 1..6");
  MarkovModel m;
  m.order = order;
  m.alpha = alpha;
  m.alphabet = alphabet;
  std::array<std::size_t, 2> sessions{};
  for (const auto& s : train) {
    if (!s.label) throw FormatError("training session '" + s.id + "' has no label");
    const auto c = class_index(*s.label);
    ++sessions[c];
    const std::span<const Token> sym(s.symbols);
    for (std::size_t t = 0; t < sym.size(); ++t) {
      if (sym[t] < 1 || sym[t] > alphabet) {
        throw InvalidSpec("symbol " + std::to_string(sym[t]) + " outside alphabet");
      }
      auto& row = m.counts[c][m.context_at(sym, t)];
      if (row.empty()) row.assign(alphabet, 0);
      row[sym[t] - 1] += 1;
    }
  }
  if (sessions[0] == 0 || sessions[1] == 0) {
    throw InsufficientData("both classes need training sessions");
  }
  m.log_prior = log_priors_from(train);
  return m;
}

Posterior mc_score(const MarkovModel& model, const SymbolizedSession& s) {
  return map_classify(model.log_likelihood(Label::Buy, s.symbols),
                      model.log_likelihood(Label::NoBuy, s.symbols),
                      model.log_prior[1], model.log_prior[0]);
}

// --- serialization ---------------------------------------------------------

nlohmann::json to_json(const NgramNBModel& m) {
  nlohmann::json j;
  j["format"] = "clickstream-model";
  j["version"] = 1;
  j["kind"] = "nb";
  j["n"] = m.n;
  j["alpha"] = m.alpha;
  j["log_prior"] = {{"NOBUY", m.log_prior[0]}, {"BUY", m.log_prior[1]}};
  nlohmann::json grams = nlohmann::json::object();
  for (const auto& [key, c] : m.counts) grams[key_string(key, m.n)] = {c[0], c[1]};
  j["counts_nobuy_buy"] = std::move(grams);
  return j;
}

NgramNBModel nb_from_json(const nlohmann::json& j) {
  check_header(j, "nb");
  NgramNBModel m;
  m.n = j.at("n").get<int>();
  m.alpha = j.at("alpha").get<double>();
  check_model_params(m.n, m.alpha);
  m.log_prior = {j.at("log_prior").at("NOBUY").get<double>(),
                 j.at("log_prior").at("BUY").get<double>()};
  for (const auto& [k, v] : j.at("counts_nobuy_buy").items()) {
    const std::array<std::uint64_t, 2> c = {v.at(0).get<std::uint64_t>(),
                                            v.at(1).get<std::uint64_t>()};
    m.counts[key_from_string(k, m.n)] = c;
    m.totals[0] += c[0];
    m.totals[1] += c[1];
  }
  return m;
}

nlohmann::json to_json(const MarkovModel& m) {
  nlohmann::json j;
  j["format"] = "clickstream-model";
  j["version"] = 1;
  j["kind"] = "mc";
  j["order"] = m.order;
  j["alpha"] = m.alpha;
  j["alphabet"] = m.alphabet;
  j["log_prior"] = {{"NOBUY", m.log_prior[0]}, {"BUY", m.log_prior[1]}};
  for (auto l : kLabels) {
    nlohmann::json table = nlohmann::json::object();
    for (const auto& [ctx, row] : m.counts[class_index(l)]) {
      table[key_string(ctx, m.order)] = row;
    }
    j["counts"][std::string(label_name(l))] = std::move(table);
  }
  return j;
}

MarkovModel mc_from_json(const nlohmann::json& j) {
  check_header(j, "mc");
  MarkovModel m;
  m.order = j.at("order").get<int>();
  m.alpha = j.at("alpha").get<double>();
  m.alphabet = j.at("alphabet").get<int>();
  check_model_params(m.order, m.alpha);
  m.log_prior = {j.at("log_prior").at("NOBUY").get<double>(),
                 j.at("log_prior").at("BUY").get<double>()};
  for (auto l : kLabels) {
    for (const auto& [k, v] : j.at("counts").at(std::string(label_name(l))).items()) {
      auto row = v.get<std::vector<std::uint64_t>>();
      if (static_cast<int>(row.size()) != m.alphabet) throw FormatError("bad count row for " + k);
      m.counts[class_index(l)][key_from_string(k, m.order)] = std::move(row);
    }
  }
  return m;
}

}  // namespace clickstream
