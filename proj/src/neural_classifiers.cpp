#include "clickstream/neural_classifiers.hpp"

#include <nlohmann/json.hpp>
#include <numeric>

#include "clickstream/errors.hpp"
#include "clickstream/neural/adam.hpp"
#include "clickstream/prob_models.hpp"
#include "clickstream/random.hpp"

namespace clickstream {

using nn::Index;
using nn::LstmParams;
using nn::LstmShape;
using nn::MatrixX;
using nn::VectorX;

namespace {

constexpr std::size_t kScoreChunk = 256;

void check_config(const NeuralConfig& cfg) {
  if (cfg.hidden < 1) throw InvalidSpec("hidden units must be >= 1");
  if (!(cfg.lr > 0)) throw InvalidSpec("learning rate must be positive");
  if (cfg.batch < 1) throw InvalidSpec("batch size must be >= 1");
  if (cfg.early_stop.max_epochs < 1) throw InvalidSpec("max_epochs must be >= 1");
}

std::vector<Token> lm_input(std::span<const Token> s) {
  std::vector<Token> in(s.size() + 1, token::kBos);
  std::copy(s.begin(), s.end(), in.begin() + 1);
  return in;
}

std::vector<Token> lm_target(std::span<const Token> s) {
  std::vector<Token> out(s.begin(), s.end());
  out.push_back(token::kEos);
  return out;
}

struct LmBatch {
  nn::SequenceBatch inputs;
  Eigen::MatrixXi targets;
};

template <typename It>
LmBatch make_lm_batch(It first, It last) {
  std::vector<std::vector<Token>> in;
  std::vector<std::vector<Token>> tgt;
  for (auto it = first; it != last; ++it) {
    in.push_back(lm_input(it->symbols));
    tgt.push_back(lm_target(it->symbols));
  }
  return {nn::make_batch(in), nn::make_batch(tgt).tokens};
}

/// Shared epoch driver: seeded shuffle, fixed-size minibatches, one Adam
/// step per batch. `objective(indices, grads)` returns the batch loss.
template <typename Objective>
double run_epoch(LstmParams<double>& params, nn::AdamState<double>& adam,
                 std::vector<std::size_t>& order, int batch_size, Rng& rng,
                 Objective&& objective) {
  shuffle(order, rng);
  double loss_sum = 0.0;
  int batches = 0;
  LstmParams<double> grads(params.shape);
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(batch_size));
    grads.theta.setZero();
    loss_sum += objective(std::span<const std::size_t>(order).subspan(start, end - start), grads);
    nn::adam_step<double>(params.theta, grads.theta, adam);
    ++batches;
  }
  return batches ? loss_sum / batches : 0.0;
}

void check_sessions_nonempty(const SessionList& sessions) {
  for (const auto& s : sessions) {
    if (s.symbols.empty()) throw EmptySession("session '" + s.id + "' is empty");
  }
}

}  // namespace

NeuralConfig default_lm_config() { return NeuralConfig{80, 0.001, 50, {}, 0}; }

NeuralConfig default_s2l_config(Pooling pooling) {
  if (pooling == Pooling::Avg) return NeuralConfig{80, 0.01, 50, {}, 0};
  return NeuralConfig{20, 0.01, 10, {}, 0};
}

// --- language model --------------------------------------------------------

LanguageModel lm_train(const SessionList& train, const SessionList& validation,
                       const NeuralConfig& cfg, nn::TrainLog* log) {
  check_config(cfg);
  if (train.empty()) throw InsufficientData("language model needs training sessions");
  if (validation.empty()) throw InsufficientData("language model needs validation sessions");

  Rng rng(cfg.seed);
  LanguageModel lm{nn::init_params<double>(
      LstmShape{token::kVocabSize, cfg.hidden, token::kVocabSize}, rng)};
  nn::AdamState<double> adam(lm.params.theta.size(), cfg.lr);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  LanguageModel best = lm;

  auto objective = [&](std::span<const std::size_t> idx, LstmParams<double>& grads) {
    SessionList chunk;
    chunk.reserve(idx.size());
    for (auto i : idx) chunk.push_back(train[i]);
    const auto b = make_lm_batch(chunk.begin(), chunk.end());
    return nn::lm_objective(lm.params, b.inputs, b.targets, &grads);
  };
  const auto result = nn::train_loop(
      cfg.early_stop,
      [&](int) { return run_epoch(lm.params, adam, order, cfg.batch, rng, objective); },
      [&] { return lm_token_accuracy(lm, validation); }, [&](int) { best = lm; });
  if (log) *log = result;
  return best;
}

namespace {

/// Applies `visit(column_index_in_sessions, log_probs_per_step, targets)`
/// chunk by chunk.
template <typename Visit>
void for_each_lm_chunk(const LanguageModel& lm, const SessionList& sessions, Visit&& visit) {
  for (std::size_t start = 0; start < sessions.size(); start += kScoreChunk) {
    const std::size_t end = std::min(sessions.size(), start + kScoreChunk);
    const auto b = make_lm_batch(sessions.begin() + start, sessions.begin() + end);
    const auto cache = nn::lstm_forward(lm.params, b.inputs);
    for (Index t = 0; t < b.inputs.steps(); ++t) {
      MatrixX<double> logits = lm.params.V().transpose() * cache.h[t + 1];
      logits.colwise() += lm.params.c();
      visit(start, t, nn::log_softmax(logits), b.targets);
    }
  }
}

}  // namespace

std::vector<double> lm_sequence_logliks(const LanguageModel& lm, const SessionList& sessions) {
  std::vector<double> out(sessions.size(), 0.0);
  for_each_lm_chunk(lm, sessions,
                    [&](std::size_t start, Index t, const MatrixX<double>& logp,
                        const Eigen::MatrixXi& targets) {
                      for (Index b = 0; b < targets.cols(); ++b) {
                        const int tgt = targets(t, b);
                        if (tgt != token::kPad) out[start + b] += logp(tgt, b);
                      }
                    });
  return out;
}

double lm_sequence_loglik(const LanguageModel& lm, std::span<const Token> symbols) {
  SessionList one{SymbolizedSession{"", {symbols.begin(), symbols.end()}, std::nullopt}};
  return lm_sequence_logliks(lm, one).front();
}

double lm_token_accuracy(const LanguageModel& lm, const SessionList& sessions) {
  std::size_t correct = 0;
  std::size_t total = 0;
  for_each_lm_chunk(lm, sessions,
                    [&](std::size_t, Index t, const MatrixX<double>& logp,
                        const Eigen::MatrixXi& targets) {
                      for (Index b = 0; b < targets.cols(); ++b) {
                        const int tgt = targets(t, b);
                        if (tgt == token::kPad) continue;
                        Index arg = 0;
                        logp.col(b).maxCoeff(&arg);
                        correct += arg == tgt;
                        ++total;
                      }
                    });
  return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}

LMMixtureModel lm_mixture_train(const Corpus& corpus, const NeuralConfig& cfg,
                                LMMixtureLogs* logs) {
  const auto train_buy = filter_label(corpus.train, Label::Buy);
  const auto train_nobuy = filter_label(corpus.train, Label::NoBuy);
  if (train_buy.empty() || train_nobuy.empty()) {
    throw InsufficientData("both classes need training sessions");
  }
  LMMixtureModel m;
  NeuralConfig buy_cfg = cfg;
  buy_cfg.seed = derive_seed(cfg.seed, 1);
  NeuralConfig nobuy_cfg = cfg;
  nobuy_cfg.seed = derive_seed(cfg.seed, 0);
  m.buy = lm_train(train_buy, filter_label(corpus.validation, Label::Buy), buy_cfg,
                   logs ? &logs->buy : nullptr);
  m.nobuy = lm_train(train_nobuy, filter_label(corpus.validation, Label::NoBuy), nobuy_cfg,
                     logs ? &logs->nobuy : nullptr);
  m.log_prior = log_priors_from(corpus.train);
  return m;
}

Posterior lm_classify(const LMMixtureModel& model, const SymbolizedSession& s) {
  return map_classify(lm_sequence_loglik(model.buy, s.symbols),
                      lm_sequence_loglik(model.nobuy, s.symbols), model.log_prior[1],
                      model.log_prior[0]);
}

std::vector<Posterior> lm_classify_all(const LMMixtureModel& model, const SessionList& sessions) {
  const auto buy = lm_sequence_logliks(model.buy, sessions);
  const auto nobuy = lm_sequence_logliks(model.nobuy, sessions);
  std::vector<Posterior> out;
  out.reserve(sessions.size());
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    out.push_back(map_classify(buy[i], nobuy[i], model.log_prior[1], model.log_prior[0]));
  }
  return out;
}

// --- seq2label -------------------------------------------------------------

S2LModel s2l_train(const SessionList& train, const SessionList& validation, Pooling pooling,
                   const NeuralConfig& cfg, nn::TrainLog* log) {
  check_config(cfg);
  const auto counts = count_labels(train);
  if (counts.buy == 0 || counts.nobuy == 0) {
    throw InsufficientData("seq2label needs both classes in the training split");
  }
  if (validation.empty()) throw InsufficientData("seq2label needs validation sessions");
  check_sessions_nonempty(train);
  check_sessions_nonempty(validation);

  Rng rng(cfg.seed);
  S2LModel model{nn::init_params<double>(LstmShape{token::kVocabSize, cfg.hidden, 1}, rng),
                 pooling};
  nn::AdamState<double> adam(model.params.theta.size(), cfg.lr);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  S2LModel best = model;

  auto objective = [&](std::span<const std::size_t> idx, LstmParams<double>& grads) {
    std::vector<std::vector<Token>> seqs;
    VectorX<double> y(static_cast<Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const auto& s = train[idx[k]];
      seqs.push_back(s.symbols);
      y(static_cast<Index>(k)) = s.label == Label::Buy ? 1.0 : 0.0;
    }
    return nn::s2l_objective(model.params, nn::make_batch(seqs), y, pooling, &grads);
  };
  const auto result = nn::train_loop(
      cfg.early_stop,
      [&](int) { return run_epoch(model.params, adam, order, cfg.batch, rng, objective); },
      [&] { return s2l_accuracy(model, validation); }, [&](int) { best = model; });
  if (log) *log = result;
  return best;
}

std::vector<double> s2l_scores(const S2LModel& model, const SessionList& sessions) {
  std::vector<double> out;
  out.reserve(sessions.size());
  for (std::size_t start = 0; start < sessions.size(); start += kScoreChunk) {
    const std::size_t end = std::min(sessions.size(), start + kScoreChunk);
    std::vector<std::vector<Token>> seqs;
    for (std::size_t i = start; i < end; ++i) {
      if (sessions[i].symbols.empty()) throw EmptySession("session '" + sessions[i].id + "'");
      seqs.push_back(sessions[i].symbols);
    }
    const auto z = nn::s2l_logits(model.params, nn::make_batch(seqs), model.pooling);
    for (Index b = 0; b < z.size(); ++b) out.push_back(sigmoid(z(b)));
  }
  return out;
}

double s2l_score(const S2LModel& model, const SymbolizedSession& s) {
  return s2l_scores(model, SessionList{s}).front();
}

double s2l_accuracy(const S2LModel& model, const SessionList& sessions) {
  if (sessions.empty()) return 0.0;
  const auto scores = s2l_scores(model, sessions);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    correct += s2l_predict(scores[i]) == sessions[i].label;
  }
  return static_cast<double>(correct) / static_cast<double>(sessions.size());
}

// --- checkpoints -----------------------------------------------------------

nlohmann::json params_to_json(const LstmParams<double>& p) {
  nlohmann::json j;
  j["shape"] = {{"input", p.shape.input}, {"hidden", p.shape.hidden}, {"output", p.shape.output}};
  j["layout"] = "W(4HxI)|U(4HxH)|b(4H)|V(HxO)|c(O), column-major, gates i|f|g|o";
  j["theta"] = std::vector<double>(p.theta.data(), p.theta.data() + p.theta.size());
  return j;
}

LstmParams<double> params_from_json(const nlohmann::json& j) {
  const auto& s = j.at("shape");
  LstmShape shape{s.at("input").get<Index>(), s.at("hidden").get<Index>(),
                  s.at("output").get<Index>()};
  const auto theta = j.at("theta").get<std::vector<double>>();
  if (static_cast<Index>(theta.size()) != shape.size()) {
    throw FormatError("checkpoint theta has " + std::to_string(theta.size()) +
                      " values, shape needs " + std::to_string(shape.size()));
  }
  LstmParams<double> p(shape);
  p.theta = Eigen::Map<const VectorX<double>>(theta.data(), shape.size());
  return p;
}

namespace {

void check_header(const nlohmann::json& j, const char* kind) {
  if (j.value("format", "") != "clickstream-model" || j.value("kind", "") != kind) {
    throw FormatError(std::string("not a ") + kind + " model document");
  }
  if (j.value("version", 0) != 1) throw FormatError("unsupported model version");
}

}  // namespace

nlohmann::json to_json(const LMMixtureModel& m) {
  nlohmann::json j;
  j["format"] = "clickstream-model";
  j["version"] = 1;
  j["kind"] = "lm";
  j["log_prior"] = {{"NOBUY", m.log_prior[0]}, {"BUY", m.log_prior[1]}};
  j["BUY"] = params_to_json(m.buy.params);
  j["NOBUY"] = params_to_json(m.nobuy.params);
  return j;
}

nlohmann::json to_json(const S2LModel& m) {
  nlohmann::json j;
  j["format"] = "clickstream-model";
  j["version"] = 1;
  j["kind"] = "s2l";
  j["pooling"] = nn::pooling_name(m.pooling);
  j["params"] = params_to_json(m.params);
  return j;
}

LMMixtureModel lm_from_json(const nlohmann::json& j) {
  check_header(j, "lm");
  LMMixtureModel m;
  m.log_prior = {j.at("log_prior").at("NOBUY").get<double>(),
                 j.at("log_prior").at("BUY").get<double>()};
  m.buy.params = params_from_json(j.at("BUY"));
  m.nobuy.params = params_from_json(j.at("NOBUY"));
  if (!(m.buy.params.shape == m.nobuy.params.shape)) {
    throw FormatError("BUY and NOBUY language models differ in shape");
  }
  return m;
}

S2LModel s2l_from_json(const nlohmann::json& j) {
  check_header(j, "s2l");
  S2LModel m;
  m.pooling = nn::parse_pooling(j.at("pooling").get<std::string>());
  m.params = params_from_json(j.at("params"));
  if (m.params.shape.output != 1) throw FormatError("seq2label checkpoint must have one output");
  return m;
}

}  // namespace clickstream
