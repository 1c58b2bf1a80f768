#include "clickstream/neural/gradcheck.hpp"

#include "clickstream/neural/heads.hpp"

namespace clickstream::nn {

namespace {

Index draw_between(Rng& rng, Index lo, Index hi) {
  return lo + static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

Token random_event(Rng& rng) {
  return static_cast<Token>(1 + uniform_index(rng, kNumEventTypes));
}

LstmParams<double> random_params(const LstmShape& shape, Rng& rng) {
  LstmParams<double> p(shape);
  for (Index i = 0; i < p.theta.size(); ++i) p.theta(i) = 2.0 * uniform01(rng) - 1.0;
  return p;
}

}  // namespace

GradCheckSuiteReport run_gradcheck_suite(const GradCheckSuiteConfig& cfg) {
  GradCheckSuiteReport suite;
  Rng rng(cfg.seed);
  static constexpr const char* kObjectives[] = {"lm", "s2l-last", "s2l-avg"};
  for (int k = 0; k < cfg.configurations; ++k) {
    GradCheckCase gc;
    gc.objective = kObjectives[k % 3];
    gc.hidden = draw_between(rng, 1, cfg.max_hidden);
    gc.steps = draw_between(rng, 1, cfg.max_steps);
    gc.batch = draw_between(rng, 1, cfg.max_batch);
    const bool lm = gc.objective == std::string("lm");

    LstmShape shape{token::kVocabSize, gc.hidden, lm ? token::kVocabSize : 1};
    const auto params = random_params(shape, rng);

    std::vector<std::vector<Token>> inputs;
    std::vector<std::vector<Token>> targets;
    VectorX<double> labels(gc.batch);
    for (Index b = 0; b < gc.batch; ++b) {
      const Index len = draw_between(rng, 1, gc.steps);
      std::vector<Token> seq;
      for (Index t = 0; t < len; ++t) seq.push_back(random_event(rng));
      if (lm) {
        std::vector<Token> in{token::kBos};
        in.insert(in.end(), seq.begin(), seq.end() - 1);
        std::vector<Token> out(seq.begin(), seq.end() - 1);
        out.push_back(token::kEos);
        inputs.push_back(std::move(in));
        targets.push_back(std::move(out));
      } else {
        inputs.push_back(std::move(seq));
      }
      labels(b) = static_cast<double>(uniform_index(rng, 2));
    }
    const auto batch = make_batch(inputs, gc.steps);
    const Eigen::MatrixXi target_tokens = lm ? make_batch(targets, gc.steps).tokens : Eigen::MatrixXi();
    const Pooling pooling = gc.objective == std::string("s2l-avg") ? Pooling::Avg : Pooling::Last;

    auto objective = [&](const VectorX<double>& theta, LstmParams<double>* grads) {
      LstmParams<double> p(shape);
      p.theta = theta;
      return lm ? lm_objective(p, batch, target_tokens, grads)
                : s2l_objective(p, batch, labels, pooling, grads);
    };
    LstmParams<double> grads(shape);
    objective(params.theta, &grads);
    gc.report = grad_check<double>(
        [&](const VectorX<double>& theta) { return objective(theta, nullptr); }, params.theta,
        grads.theta, cfg.step);
    suite.max_rel_error = std::max(suite.max_rel_error, gc.report.max_rel_error);
    suite.cases.push_back(std::move(gc));
  }
  return suite;
}

}  // namespace clickstream::nn
