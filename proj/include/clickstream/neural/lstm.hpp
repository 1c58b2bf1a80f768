#pragma once

#include <Eigen/Core>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "clickstream/errors.hpp"
#include "clickstream/random.hpp"
#include "clickstream/types.hpp"

namespace clickstream::nn {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVectorX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using Index = Eigen::Index;

/// Layer sizes of a one-layer LSTM followed by a fully connected layer.
/// Parameters live in one flat vector laid out as W | U | b | V | c.
struct LstmShape {
  Index input = token::kVocabSize;
  Index hidden = 0;
  Index output = 0;

  Index gates() const { return 4 * hidden; }
  Index w_offset() const { return 0; }
  Index u_offset() const { return gates() * input; }
  Index b_offset() const { return u_offset() + gates() * hidden; }
  Index v_offset() const { return b_offset() + gates(); }
  Index c_offset() const { return v_offset() + hidden * output; }
  Index size() const { return c_offset() + output; }

  friend bool operator==(const LstmShape&, const LstmShape&) = default;
};

/// Gate rows are stacked input | forget | cell | output, H rows each.
template <typename Scalar>
struct LstmParams {
  LstmShape shape;
  VectorX<Scalar> theta;

  LstmParams() = default;
  explicit LstmParams(const LstmShape& s)
      : shape(s), theta(VectorX<Scalar>::Zero(s.size())) {}

  using Map = Eigen::Map<MatrixX<Scalar>>;
  using ConstMap = Eigen::Map<const MatrixX<Scalar>>;
  using VecMap = Eigen::Map<VectorX<Scalar>>;
  using ConstVecMap = Eigen::Map<const VectorX<Scalar>>;

  /// 4H x I input weights.
  Map W() { return Map(theta.data() + shape.w_offset(), shape.gates(), shape.input); }
  ConstMap W() const { return ConstMap(theta.data() + shape.w_offset(), shape.gates(), shape.input); }
  /// 4H x H recurrent weights.
  Map U() { return Map(theta.data() + shape.u_offset(), shape.gates(), shape.hidden); }
  ConstMap U() const { return ConstMap(theta.data() + shape.u_offset(), shape.gates(), shape.hidden); }
  VecMap b() { return VecMap(theta.data() + shape.b_offset(), shape.gates()); }
  ConstVecMap b() const { return ConstVecMap(theta.data() + shape.b_offset(), shape.gates()); }
  /// H x O output weights; logits = V^T h + c.
  Map V() { return Map(theta.data() + shape.v_offset(), shape.hidden, shape.output); }
  ConstMap V() const { return ConstMap(theta.data() + shape.v_offset(), shape.hidden, shape.output); }
  VecMap c() { return VecMap(theta.data() + shape.c_offset(), shape.output); }
  ConstVecMap c() const { return ConstVecMap(theta.data() + shape.c_offset(), shape.output); }

  bool all_finite() const { return theta.allFinite(); }
};

/// Uniform(-1/sqrt(H), 1/sqrt(H)) weights, zero biases, forget-gate bias 1.
template <typename Scalar>
LstmParams<Scalar> init_params(const LstmShape& shape, Rng& rng) {
  LstmParams<Scalar> p(shape);
  const Scalar r = Scalar(1) / std::sqrt(static_cast<Scalar>(shape.hidden));
  auto draw = [&](auto&& m) {
    for (Index j = 0; j < m.cols(); ++j)
      for (Index i = 0; i < m.rows(); ++i)
        m(i, j) = static_cast<Scalar>(2.0 * uniform01(rng) - 1.0) * r;
  };
  draw(p.W());
  draw(p.U());
  draw(p.V());
  p.b().setZero();
  p.b().segment(shape.hidden, shape.hidden).setOnes();
  p.c().setZero();
  return p;
}

/// Token matrix (steps x batch) padded with PAD after each true length.
struct SequenceBatch {
  Eigen::MatrixXi tokens;
  std::vector<Index> lengths;

  Index steps() const { return tokens.rows(); }
  Index size() const { return tokens.cols(); }
  bool real(Index t, Index col) const { return t < lengths[col]; }
};

/// Builds a batch; `min_steps` pads every column further with PAD.
inline SequenceBatch make_batch(const std::vector<std::vector<Token>>& seqs,
                                Index min_steps = 0) {
  SequenceBatch batch;
  Index width = min_steps;
  for (const auto& s : seqs) width = std::max<Index>(width, static_cast<Index>(s.size()));
  batch.tokens = Eigen::MatrixXi::Constant(width, static_cast<Index>(seqs.size()), token::kPad);
  for (std::size_t b = 0; b < seqs.size(); ++b) {
    for (std::size_t t = 0; t < seqs[b].size(); ++t) {
      const Token tok = seqs[b][t];
      if (tok == token::kPad || tok >= token::kVocabSize) {
        throw ShapeMismatch("token " + std::to_string(tok) + " not allowed inside a sequence");
      }
      batch.tokens(static_cast<Index>(t), static_cast<Index>(b)) = tok;
    }
    batch.lengths.push_back(static_cast<Index>(seqs[b].size()));
  }
  return batch;
}

template <typename Scalar>
void check_batch(const LstmParams<Scalar>& p, const SequenceBatch& batch) {
  if (p.theta.size() != p.shape.size()) throw ShapeMismatch("parameter vector size");
  if (static_cast<Index>(batch.lengths.size()) != batch.size()) {
    throw ShapeMismatch("lengths do not match batch width");
  }
  for (Index b = 0; b < batch.size(); ++b) {
    if (batch.lengths[b] < 0 || batch.lengths[b] > batch.steps()) {
      throw ShapeMismatch("sequence length exceeds padded width");
    }
    for (Index t = 0; t < batch.steps(); ++t) {
      const int tok = batch.tokens(t, b);
      const bool pad = tok == token::kPad;
      if (batch.real(t, b) == pad || tok < 0 || tok >= p.shape.input) {
        throw ShapeMismatch("token layout inconsistent with lengths");
      }
    }
  }
}

template <typename Scalar>
struct LstmCache {
  /// steps + 1 entries; index 0 is the zero initial state and index t + 1
  /// the state after step t. Padded steps repeat the previous state.
  std::vector<MatrixX<Scalar>> h;
  std::vector<MatrixX<Scalar>> c;
  /// Activated gates per step (4H x B).
  std::vector<MatrixX<Scalar>> gates;
  /// tanh of the updated cell per step (H x B).
  std::vector<MatrixX<Scalar>> cell_tanh;
};

template <typename Derived>
auto sigmoid_array(const Eigen::ArrayBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return (Scalar(1) + (-x).exp()).inverse();
}

template <typename Scalar>
LstmCache<Scalar> lstm_forward(const LstmParams<Scalar>& p, const SequenceBatch& batch) {
  check_batch(p, batch);
  const Index H = p.shape.hidden;
  const Index B = batch.size();
  const Index T = batch.steps();
  const auto W = p.W();
  const auto U = p.U();
  const auto bias = p.b();

  LstmCache<Scalar> cache;
  cache.h.assign(T + 1, MatrixX<Scalar>::Zero(H, B));
  cache.c.assign(T + 1, MatrixX<Scalar>::Zero(H, B));
  cache.gates.resize(T);
  cache.cell_tanh.resize(T);

  for (Index t = 0; t < T; ++t) {
    MatrixX<Scalar> z = U * cache.h[t];
    z.colwise() += bias;
    for (Index b = 0; b < B; ++b) {
      if (batch.real(t, b)) z.col(b) += W.col(batch.tokens(t, b));
    }
    MatrixX<Scalar>& g = cache.gates[t];
    g.resize(4 * H, B);
    g.topRows(2 * H) = sigmoid_array(z.topRows(2 * H).array()).matrix();
    g.middleRows(2 * H, H) = z.middleRows(2 * H, H).array().tanh().matrix();
    g.bottomRows(H) = sigmoid_array(z.bottomRows(H).array()).matrix();

    const auto in = g.topRows(H).array();
    const auto forget = g.middleRows(H, H).array();
    const auto cand = g.middleRows(2 * H, H).array();
    const auto out = g.bottomRows(H).array();

    cache.c[t + 1] = (forget * cache.c[t].array() + in * cand).matrix();
    cache.cell_tanh[t] = cache.c[t + 1].array().tanh().matrix();
    cache.h[t + 1] = (out * cache.cell_tanh[t].array()).matrix();
    for (Index b = 0; b < B; ++b) {
      if (!batch.real(t, b)) {
        cache.c[t + 1].col(b) = cache.c[t].col(b);
        cache.h[t + 1].col(b) = cache.h[t].col(b);
      }
    }
  }
  return cache;
}

/// Backpropagation through time. `dh[t]` is the loss gradient flowing into
/// the state after step t from the output head. Gradients for W, U and b
/// are accumulated into `grads`; padded steps contribute nothing.
template <typename Scalar>
void lstm_backward(const LstmParams<Scalar>& p, const SequenceBatch& batch,
                   const LstmCache<Scalar>& cache,
                   const std::vector<MatrixX<Scalar>>& dh,
                   LstmParams<Scalar>& grads) {
  const Index H = p.shape.hidden;
  const Index B = batch.size();
  const Index T = batch.steps();
  const auto U = p.U();
  auto dW = grads.W();
  auto dU = grads.U();
  auto db = grads.b();

  MatrixX<Scalar> dh_next = MatrixX<Scalar>::Zero(H, B);
  MatrixX<Scalar> dc_next = MatrixX<Scalar>::Zero(H, B);
  MatrixX<Scalar> dz(4 * H, B);

  for (Index t = T - 1; t >= 0; --t) {
    const MatrixX<Scalar> dh_t = dh[t] + dh_next;
    const auto& g = cache.gates[t];
    const auto in = g.topRows(H).array();
    const auto forget = g.middleRows(H, H).array();
    const auto cand = g.middleRows(2 * H, H).array();
    const auto out = g.bottomRows(H).array();
    const auto tc = cache.cell_tanh[t].array();

    const auto d_out = dh_t.array() * tc;
    const MatrixX<Scalar> dc_new =
        (dc_next.array() + dh_t.array() * out * (Scalar(1) - tc.square())).matrix();
    dz.topRows(H) = (dc_new.array() * cand * in * (Scalar(1) - in)).matrix();
    dz.middleRows(H, H) =
        (dc_new.array() * cache.c[t].array() * forget * (Scalar(1) - forget)).matrix();
    dz.middleRows(2 * H, H) = (dc_new.array() * in * (Scalar(1) - cand.square())).matrix();
    dz.bottomRows(H) = (d_out * out * (Scalar(1) - out)).matrix();
    MatrixX<Scalar> dc_prev = (dc_new.array() * forget).matrix();

    for (Index b = 0; b < B; ++b) {
      if (!batch.real(t, b)) {
        dz.col(b).setZero();
        dc_prev.col(b) = dc_next.col(b);
      }
    }

    dU.noalias() += dz * cache.h[t].transpose();
    db += dz.rowwise().sum();
    for (Index b = 0; b < B; ++b) {
      if (batch.real(t, b)) dW.col(batch.tokens(t, b)) += dz.col(b);
    }

    dh_next.noalias() = U.transpose() * dz;
    for (Index b = 0; b < B; ++b) {
      if (!batch.real(t, b)) dh_next.col(b) = dh_t.col(b);
    }
    dc_next = std::move(dc_prev);
  }
}

}  // namespace clickstream::nn
