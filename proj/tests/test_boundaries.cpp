#include <doctest.h>

#include <cmath>

#include "boincx/boundaries.hpp"
#include "boincx/posterior.hpp"
#include "oracles/oracle_values.hpp"

using namespace boincx;

TEST_CASE("boundaries for the phi = 0.3 family") {
  const auto b = lambda_boundaries(0.30, 0.18, 0.42);
  CHECK(std::round(b.lambda_e * 1000) / 1000 == doctest::Approx(0.236));
  CHECK(std::round(b.lambda_d * 1000) / 1000 == doctest::Approx(0.359));
}

TEST_CASE("boundaries match the high-precision oracle") {
  for (const auto& c : oracle::kBoundaries) {
    const auto b = lambda_boundaries(c.phi, c.phi1, c.phi2);
    CHECK(b.lambda_e == doctest::Approx(c.lambda_e).epsilon(1e-14));
    CHECK(b.lambda_d == doctest::Approx(c.lambda_d).epsilon(1e-14));
    CHECK(b.lambda_e < c.phi);
    CHECK(c.phi < b.lambda_d);
  }
}

TEST_CASE("lambda_e approaches phi as phi1 approaches phi") {
  const auto b = lambda_boundaries(0.30, 0.30 - 1e-8, 0.42);
  CHECK(std::fabs(b.lambda_e - 0.30) < 1e-6);
}

TEST_CASE("boundary ordering violations are domain errors") {
  CHECK_THROWS_AS(lambda_boundaries(0.3, 0.3, 0.42), std::domain_error);
  CHECK_THROWS_AS(lambda_boundaries(0.3, 0.18, 0.25), std::domain_error);
  CHECK_THROWS_AS(lambda_boundaries(0.3, 0.0, 0.42), std::domain_error);
  CHECK_THROWS_AS(lambda_boundaries(0.3, 0.18, 1.0), std::domain_error);
}

TEST_CASE("decision table examples") {
  const DesignParams p = standard_params(0.30);
  const auto t = decision_table(p, 9);
  REQUIRE(t.rows.size() == 9);
  const auto& n3 = t.rows[2];
  CHECK(n3.n == 3);
  CHECK(n3.escalate_if_y_le == 0);
  CHECK(n3.deescalate_if_y_ge == 2);
  REQUIRE(n3.eliminate_if_y_ge);
  CHECK(*n3.eliminate_if_y_ge == 3);
  CHECK(classify_rate(9, 3, p) == IntervalAction::stay);
  CHECK(classify_rate(1, 0, p) == IntervalAction::escalate);
  CHECK(t.rows[0].escalate_if_y_le == 0);
  CHECK_FALSE(t.rows[0].eliminate_if_y_ge);  // below min_n_eliminate
  CHECK_THROWS(decision_table(p, 2));
}

TEST_CASE("decision table is monotone and consistent with direct comparison") {
  for (double phi : {0.2, 0.25, 0.3, 0.33}) {
    DesignParams p = standard_params(phi);
    const auto t = decision_table(p, 60);
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
      const auto& r = t.rows[k];
      CHECK(r.escalate_if_y_le < r.deescalate_if_y_ge);
      if (r.eliminate_if_y_ge) CHECK(*r.eliminate_if_y_ge >= r.deescalate_if_y_ge);
      if (k > 0) {
        CHECK(r.escalate_if_y_le >= t.rows[k - 1].escalate_if_y_le);
        CHECK(r.deescalate_if_y_ge >= t.rows[k - 1].deescalate_if_y_ge);
      }
      for (int y = 0; y <= r.n; ++y) {
        const double rate = static_cast<double>(y) / r.n;
        const IntervalAction direct = rate <= p.lambda_e   ? IntervalAction::escalate
                                      : rate > p.lambda_d ? IntervalAction::deescalate
                                                          : IntervalAction::stay;
        const IntervalAction tabled = y <= r.escalate_if_y_le      ? IntervalAction::escalate
                                      : y >= r.deescalate_if_y_ge ? IntervalAction::deescalate
                                                                  : IntervalAction::stay;
        CHECK(direct == tabled);
        CHECK(classify_rate(r.n, y, p) == direct);
      }
    }
  }
}

TEST_CASE("elimination thresholds agree with the quadrature oracle") {
  for (const auto& c : oracle::kOverdoseTail) {
    const double tail = overdose_prob(BetaPosterior::from_counts(c.n, c.y), 0.3);
    CHECK(tail == doctest::Approx(c.tail).epsilon(1e-10));
  }
  for (double eps : {0.90, 0.95}) {
    DesignParams p = standard_params(0.30);
    p.epsilon = eps;
    const auto t = decision_table(p, 30);
    for (const auto& row : t.rows) {
      std::optional<int> expect;
      if (row.n >= p.min_n_eliminate)
        for (const auto& c : oracle::kOverdoseTail)
          if (c.n == row.n && c.tail >= eps && (!expect || c.y < *expect)) expect = c.y;
      CHECK(row.eliminate_if_y_ge == expect);
    }
  }
}
