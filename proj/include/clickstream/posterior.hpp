#pragma once

#include "clickstream/types.hpp"

namespace clickstream {

/// Two-class posterior from class log-likelihoods and log-priors.
struct Posterior {
  double p_buy = 0.5;
  double p_nobuy = 0.5;
  double log_lik_buy = 0.0;
  double log_lik_nobuy = 0.0;

  /// BUY iff P(BUY|s) > P(NOBUY|s); ties go to NOBUY.
  Label predicted() const { return p_buy > p_nobuy ? Label::Buy : Label::NoBuy; }
};

/// Logistic sigmoid, stable for large |x|.
double sigmoid(double x);

/// log(exp(a) + exp(b)) without overflow. -inf inputs are allowed.
double log_add_exp(double a, double b);

/// Bayes rule in log space. Each probability is the logistic of the
/// log-odds, so p_buy + p_nobuy == 1 up to rounding for any magnitudes.
/// If both joint scores are -inf the result is the 0.5/0.5 tie.
Posterior map_classify(double log_lik_buy, double log_lik_nobuy,
                       double log_prior_buy, double log_prior_nobuy);

}  // namespace clickstream
