#include "clickstream/posterior.hpp"

#include <cmath>
#include <limits>

namespace clickstream {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(-std::abs(a - b)));
}

Posterior map_classify(double log_lik_buy, double log_lik_nobuy,
                       double log_prior_buy, double log_prior_nobuy) {
  Posterior p;
  p.log_lik_buy = log_lik_buy;
  p.log_lik_nobuy = log_lik_nobuy;
  const double joint_buy = log_prior_buy + log_lik_buy;
  const double joint_nobuy = log_prior_nobuy + log_lik_nobuy;
  const double log_odds = joint_buy - joint_nobuy;
  if (std::isnan(log_odds)) return p;
  p.p_buy = sigmoid(log_odds);
  p.p_nobuy = sigmoid(-log_odds);
  return p;
}

}  // namespace clickstream
