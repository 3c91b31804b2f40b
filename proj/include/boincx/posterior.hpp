#pragma once

// Conjugate Beta-binomial posterior for a single combination's DLT rate.

namespace boincx {

struct BetaPosterior {
  double a = 1.0;
  double b = 1.0;

  // Beta(prior_a + y, prior_b + n - y).
  static BetaPosterior from_counts(int n, int y, double prior_a = 1.0, double prior_b = 1.0);
};

// Regularized incomplete beta function I_x(a, b).
double beta_cdf(double x, double a, double b);

// Pr(lo < pi < hi | data). Requires 0 <= lo < hi <= 1.
double interval_prob(const BetaPosterior& post, double lo, double hi);

// Pr(pi > phi | data).
double overdose_prob(const BetaPosterior& post, double phi);

}  // namespace boincx
