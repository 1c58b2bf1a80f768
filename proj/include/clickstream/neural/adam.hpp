#pragma once

#include <cmath>
#include <cstdint>

#include "clickstream/neural/lstm.hpp"

namespace clickstream::nn {

template <typename Scalar>
struct AdamState {
  VectorX<Scalar> m;
  VectorX<Scalar> v;
  std::int64_t t = 0;
  Scalar lr = Scalar(0.001);
  Scalar beta1 = Scalar(0.9);
  Scalar beta2 = Scalar(0.999);
  Scalar eps = Scalar(1e-8);

  AdamState() = default;
  AdamState(Index size, Scalar learning_rate)
      : m(VectorX<Scalar>::Zero(size)), v(VectorX<Scalar>::Zero(size)), lr(learning_rate) {}
};

/// One bias-corrected Adam update of `theta` in place.
template <typename Scalar>
void adam_step(Eigen::Ref<VectorX<Scalar>> theta, const Eigen::Ref<const VectorX<Scalar>>& grad,
               AdamState<Scalar>& s) {
  if (theta.size() != grad.size() || s.m.size() != theta.size()) {
    throw ShapeMismatch("adam: parameter, gradient and moment sizes differ");
  }
  ++s.t;
  s.m = s.beta1 * s.m + (Scalar(1) - s.beta1) * grad;
  s.v = s.beta2 * s.v + (Scalar(1) - s.beta2) * grad.cwiseProduct(grad);
  const Scalar c1 = Scalar(1) - std::pow(s.beta1, static_cast<Scalar>(s.t));
  const Scalar c2 = Scalar(1) - std::pow(s.beta2, static_cast<Scalar>(s.t));
  theta.array() -= s.lr * (s.m.array() / c1) / ((s.v.array() / c2).sqrt() + s.eps);
}

}  // namespace clickstream::nn
