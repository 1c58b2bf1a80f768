#pragma once

#include <algorithm>
#include <cmath>
#include <type_traits>

#include "clickstream/neural/lstm.hpp"

namespace clickstream::nn {

enum class Pooling { Last, Avg };

inline std::string_view pooling_name(Pooling p) { return p == Pooling::Last ? "last" : "avg"; }

inline Pooling parse_pooling(std::string_view s) {
  if (s == "last") return Pooling::Last;
  if (s == "avg") return Pooling::Avg;
  throw InvalidSpec("unknown pooling '" + std::string(s) + "'");
}

template <typename Scalar>
Scalar softplus(Scalar x) {
  return std::max(x, Scalar(0)) + std::log1p(std::exp(-std::abs(x)));
}

/// Log-softmax of each column.
template <typename Scalar>
MatrixX<Scalar> log_softmax(const MatrixX<Scalar>& logits) {
  MatrixX<Scalar> out(logits.rows(), logits.cols());
  for (Index b = 0; b < logits.cols(); ++b) {
    const Scalar hi = logits.col(b).maxCoeff();
    const Scalar lse = hi + std::log((logits.col(b).array() - hi).exp().sum());
    out.col(b) = logits.col(b).array() - lse;
  }
  return out;
}

/// Next-token language-model objective: mean cross-entropy of
/// softmax(V^T h_t + c) against `targets` (steps x batch, PAD skipped).
/// With `grads`, runs the full backward pass and accumulates gradients
/// scaled by `scale`. Returns scale * loss.
template <typename Scalar>
Scalar lm_objective(const LstmParams<Scalar>& p, const SequenceBatch& inputs,
                    const Eigen::MatrixXi& targets,
                    std::type_identity_t<LstmParams<Scalar>>* grads,
                    std::type_identity_t<Scalar> scale = Scalar(1)) {
  if (targets.rows() != inputs.steps() || targets.cols() != inputs.size()) {
    throw ShapeMismatch("targets must match the input batch");
  }
  const auto cache = lstm_forward(p, inputs);
  const Index T = inputs.steps();
  const Index B = inputs.size();
  const auto V = p.V();

  Index count = 0;
  for (Index t = 0; t < T; ++t)
    for (Index b = 0; b < B; ++b) count += targets(t, b) != token::kPad;
  if (count == 0) return Scalar(0);

  Scalar total = 0;
  std::vector<MatrixX<Scalar>> dh;
  if (grads) dh.assign(T, MatrixX<Scalar>::Zero(p.shape.hidden, B));
  for (Index t = 0; t < T; ++t) {
    MatrixX<Scalar> logits = V.transpose() * cache.h[t + 1];
    logits.colwise() += p.c();
    const MatrixX<Scalar> logp = log_softmax(logits);
    MatrixX<Scalar> dlogits;
    if (grads) dlogits = MatrixX<Scalar>::Zero(logits.rows(), B);
    bool any = false;
    for (Index b = 0; b < B; ++b) {
      const int target = targets(t, b);
      if (target == token::kPad) continue;
      if (target < 0 || target >= p.shape.output) throw ShapeMismatch("target token out of range");
      any = true;
      total -= logp(target, b);
      if (grads) {
        dlogits.col(b) = logp.col(b).array().exp();
        dlogits(target, b) -= Scalar(1);
      }
    }
    if (grads && any) {
      dlogits *= scale / static_cast<Scalar>(count);
      grads->V().noalias() += cache.h[t + 1] * dlogits.transpose();
      grads->c() += dlogits.rowwise().sum();
      dh[t].noalias() = V * dlogits;
    }
  }
  if (grads) lstm_backward(p, inputs, cache, dh, *grads);
  return scale * total / static_cast<Scalar>(count);
}

/// Pooled LSTM states (H x B): final non-PAD state or mean over non-PAD
/// states.
template <typename Scalar>
MatrixX<Scalar> pool_states(const LstmCache<Scalar>& cache, const SequenceBatch& batch,
                            Pooling pooling) {
  const Index H = cache.h.front().rows();
  MatrixX<Scalar> pooled = MatrixX<Scalar>::Zero(H, batch.size());
  for (Index b = 0; b < batch.size(); ++b) {
    const Index len = batch.lengths[b];
    if (len == 0) throw EmptySession("cannot pool an empty sequence");
    if (pooling == Pooling::Last) {
      pooled.col(b) = cache.h[len].col(b);
    } else {
      for (Index t = 1; t <= len; ++t) pooled.col(b) += cache.h[t].col(b);
      pooled.col(b) /= static_cast<Scalar>(len);
    }
  }
  return pooled;
}

/// Seq2Label logits V^T pooled + c, one per column.
template <typename Scalar>
RowVectorX<Scalar> s2l_logits(const LstmParams<Scalar>& p, const SequenceBatch& batch,
                              Pooling pooling) {
  if (p.shape.output != 1) throw ShapeMismatch("seq2label head needs one output");
  const auto cache = lstm_forward(p, batch);
  RowVectorX<Scalar> z = p.V().transpose() * pool_states(cache, batch, pooling);
  z.array() += p.c()(0);
  return z;
}

/// Seq2Label objective: mean binary cross-entropy of sigmoid(logit)
/// against `labels` (1 = BUY). Same gradient/scale contract as
/// lm_objective.
template <typename Scalar>
Scalar s2l_objective(const LstmParams<Scalar>& p, const SequenceBatch& batch,
                     const VectorX<Scalar>& labels, Pooling pooling,
                     std::type_identity_t<LstmParams<Scalar>>* grads,
                     std::type_identity_t<Scalar> scale = Scalar(1)) {
  if (p.shape.output != 1) throw ShapeMismatch("seq2label head needs one output");
  if (labels.size() != batch.size()) throw ShapeMismatch("labels must match batch width");
  const Index B = batch.size();
  if (B == 0) return Scalar(0);
  const auto cache = lstm_forward(p, batch);
  const MatrixX<Scalar> pooled = pool_states(cache, batch, pooling);
  RowVectorX<Scalar> z = p.V().transpose() * pooled;
  z.array() += p.c()(0);

  Scalar total = 0;
  for (Index b = 0; b < B; ++b) total += softplus(z(b)) - labels(b) * z(b);
  if (!grads) return scale * total / static_cast<Scalar>(B);

  RowVectorX<Scalar> dz(B);
  for (Index b = 0; b < B; ++b) {
    const Scalar prob = z(b) >= 0 ? Scalar(1) / (Scalar(1) + std::exp(-z(b)))
                                  : std::exp(z(b)) / (Scalar(1) + std::exp(z(b)));
    dz(b) = (prob - labels(b)) * scale / static_cast<Scalar>(B);
  }
  grads->V().noalias() += pooled * dz.transpose();
  grads->c()(0) += dz.sum();
  const MatrixX<Scalar> dpooled = p.V() * dz;

  std::vector<MatrixX<Scalar>> dh(batch.steps(), MatrixX<Scalar>::Zero(p.shape.hidden, B));
  for (Index b = 0; b < B; ++b) {
    const Index len = batch.lengths[b];
    if (pooling == Pooling::Last) {
      dh[len - 1].col(b) += dpooled.col(b);
    } else {
      for (Index t = 0; t < len; ++t) dh[t].col(b) += dpooled.col(b) / static_cast<Scalar>(len);
    }
  }
  lstm_backward(p, batch, cache, dh, *grads);
  return scale * total / static_cast<Scalar>(B);
}

}  // namespace clickstream::nn
