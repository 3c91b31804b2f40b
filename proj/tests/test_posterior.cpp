#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "boincx/boundaries.hpp"
#include "boincx/posterior.hpp"
#include "boincx/rng.hpp"
#include "oracles/oracle_values.hpp"

using namespace boincx;

TEST_CASE("overdose tail closed forms") {
  CHECK(overdose_prob(BetaPosterior::from_counts(3, 3), 0.3) == doctest::Approx(1 - std::pow(0.3, 4)).epsilon(1e-13));
  CHECK(overdose_prob(BetaPosterior::from_counts(0, 0), 0.3) == doctest::Approx(0.7).epsilon(1e-13));
  CHECK(overdose_prob(BetaPosterior::from_counts(3, 2), 0.3) ==
        doctest::Approx(1 - (4 * std::pow(0.3, 3) - 3 * std::pow(0.3, 4))).epsilon(1e-13));
}

TEST_CASE("interval probabilities match quadrature") {
  const auto b = lambda_boundaries(0.30, 0.18, 0.42);
  for (const auto& c : oracle::kIntervalProb) {
    const double p = interval_prob(BetaPosterior::from_counts(c.n, c.y), b.lambda_e, b.lambda_d);
    CHECK(p == doctest::Approx(c.tail).epsilon(1e-10));
  }
  // A flat prior puts exactly the interval width between the boundaries.
  CHECK(interval_prob(BetaPosterior{}, b.lambda_e, b.lambda_d) == doctest::Approx(b.lambda_d - b.lambda_e));
}

TEST_CASE("the unit interval carries all posterior mass") {
  for (int n : {0, 3, 12, 45})
    for (int y = 0; y <= n; y += 3) CHECK(interval_prob(BetaPosterior::from_counts(n, y), 0.0, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("overdose tail increases with y for fixed n") {
  for (int n = 1; n <= 45; ++n) {
    double prev = -1.0;
    for (int y = 0; y <= n; ++y) {
      const double t = overdose_prob(BetaPosterior::from_counts(n, y), 0.3);
      CHECK(t >= prev);
      if (prev < 0.999) CHECK(t > prev);
      CHECK(t >= 0.0);
      CHECK(t <= 1.0);
      prev = t;
    }
  }
}

TEST_CASE("interval probability agrees with Monte Carlo sampling") {
  Rng rng(7);
  // Beta(a, b) with integer shapes: the a-th order statistic of a+b-1 uniforms.
  auto draw_beta = [&](int a, int b) {
    std::vector<double> u(static_cast<std::size_t>(a + b - 1));
    for (auto& x : u) x = rng.uniform();
    std::nth_element(u.begin(), u.begin() + (a - 1), u.end());
    return u[static_cast<std::size_t>(a - 1)];
  };
  constexpr int draws = 4000;
  for (int k = 0; k < 100; ++k) {
    const int n = static_cast<int>(rng.uniform_index(20));
    const int y = n == 0 ? 0 : static_cast<int>(rng.uniform_index(static_cast<std::size_t>(n + 1)));
    double lo = rng.uniform(), hi = rng.uniform();
    if (lo > hi) std::swap(lo, hi);
    if (hi - lo < 1e-3) continue;
    const auto post = BetaPosterior::from_counts(n, y);
    const double exact = interval_prob(post, lo, hi);
    int hits = 0;
    for (int d = 0; d < draws; ++d) {
      const double x = draw_beta(1 + y, 1 + n - y);
      hits += (x > lo && x < hi) ? 1 : 0;
    }
    const double est = static_cast<double>(hits) / draws;
    const double se = std::sqrt(std::max(exact * (1 - exact), 1e-4) / draws);
    CHECK(std::fabs(est - exact) <= 3 * se);
  }
}

TEST_CASE("invalid inputs are domain errors") {
  const BetaPosterior p{};
  CHECK_THROWS_AS(interval_prob(p, 0.5, 0.4), std::domain_error);
  CHECK_THROWS_AS(interval_prob(p, -0.1, 0.4), std::domain_error);
  CHECK_THROWS_AS(interval_prob(p, 0.1, 1.1), std::domain_error);
  CHECK_THROWS_AS(BetaPosterior::from_counts(3, 4), std::domain_error);
  CHECK_THROWS_AS(beta_cdf(0.5, 0.0, 1.0), std::domain_error);
}
