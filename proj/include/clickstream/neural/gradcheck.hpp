#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "clickstream/neural/lstm.hpp"

namespace clickstream::nn {

struct GradCheckReport {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  Index worst_index = -1;
  Index checked = 0;
};

/// Relative error with a floor on the denominator, so entries whose true
/// gradient is ~0 are judged on absolute error against `floor`.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

/// Central differences of `loss(theta)` for every coordinate, compared
/// against `analytic`. `loss` must be deterministic.
template <typename Scalar, typename LossFn>
GradCheckReport grad_check(LossFn&& loss, VectorX<Scalar> theta,
                           const VectorX<Scalar>& analytic, Scalar step = Scalar(1e-5)) {
  if (theta.size() != analytic.size()) throw ShapeMismatch("gradient size");
  GradCheckReport report;
  for (Index i = 0; i < theta.size(); ++i) {
    const Scalar saved = theta(i);
    theta(i) = saved + step;
    const Scalar up = loss(theta);
    theta(i) = saved - step;
    const Scalar down = loss(theta);
    theta(i) = saved;
    const double numeric = static_cast<double>((up - down) / (Scalar(2) * step));
    const double a = static_cast<double>(analytic(i));
    const double rel = relative_error(a, numeric);
    report.max_abs_error = std::max(report.max_abs_error, std::abs(a - numeric));
    if (rel > report.max_rel_error || report.worst_index < 0) {
      report.max_rel_error = std::max(rel, report.max_rel_error);
      report.worst_index = i;
    }
    ++report.checked;
  }
  return report;
}

struct GradCheckSuiteConfig {
  int configurations = 100;
  Index max_hidden = 5;
  Index max_steps = 6;
  Index max_batch = 3;
  double step = 1e-5;
  std::uint64_t seed = 0;
};

struct GradCheckCase {
  std::string objective;  // "lm", "s2l-last", "s2l-avg"
  Index hidden = 0;
  Index steps = 0;
  Index batch = 0;
  GradCheckReport report;
};

struct GradCheckSuiteReport {
  std::vector<GradCheckCase> cases;
  double max_rel_error = 0.0;
};

/// Random small networks cycling through the LM and both Seq2Label
/// objectives, with random lengths so masking is exercised.
GradCheckSuiteReport run_gradcheck_suite(const GradCheckSuiteConfig& cfg);

}  // namespace clickstream::nn
