#include "boincx/posterior.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace boincx {

BetaPosterior BetaPosterior::from_counts(int n, int y, double prior_a, double prior_b) {
  if (n < 0 || y < 0 || y > n)
    throw std::domain_error("invalid counts n=" + std::to_string(n) + " y=" + std::to_string(y));
  if (!(prior_a > 0.0 && prior_b > 0.0)) throw std::domain_error("Beta prior shapes must be positive");
  return BetaPosterior{prior_a + y, prior_b + (n - y)};
}

namespace {

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_continued_fraction(double x, double a, double b) {
  constexpr int max_iter = 1000;
  constexpr double eps = 1e-16;
  constexpr double tiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) return h;
  }
  throw std::runtime_error("incomplete beta continued fraction did not converge");
}

}  // namespace

double beta_cdf(double x, double a, double b) {
  if (!(a > 0.0 && b > 0.0)) throw std::domain_error("beta_cdf: shapes must be positive");
  if (std::isnan(x)) throw std::domain_error("beta_cdf: x is NaN");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  // The fraction converges fast for x < (a+1)/(a+b+2); use the symmetry
  // I_x(a,b) = 1 - I_{1-x}(b,a) on the other side.
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(x, a, b) / a;
  return 1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b;
}

double interval_prob(const BetaPosterior& post, double lo, double hi) {
  if (!(lo >= 0.0 && lo < hi && hi <= 1.0))
    throw std::domain_error("interval_prob: require 0 <= lo < hi <= 1");
  const double p = beta_cdf(hi, post.a, post.b) - beta_cdf(lo, post.a, post.b);
  return p < 0.0 ? 0.0 : p;
}

double overdose_prob(const BetaPosterior& post, double phi) {
  if (!(phi > 0.0 && phi < 1.0)) throw std::domain_error("overdose_prob: phi must lie in (0,1)");
  return 1.0 - beta_cdf(phi, post.a, post.b);
}

}  // namespace boincx
