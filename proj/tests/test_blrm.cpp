#include <doctest.h>

#include <cmath>
#include <numbers>

#include "boincx/blrm.hpp"
#include "test_support.hpp"

using namespace boincx;
using testing::paper_grid;

TEST_CASE("doses are scaled by the top level of each drug") {
  const auto d = dose_rescale(paper_grid());
  REQUIRE(d.a.size() == 4);
  CHECK(d.a[0] == doctest::Approx(0.2));
  CHECK(d.a[1] == doctest::Approx(1.0 / 3.0));
  CHECK(d.a[3] == 1.0);
  CHECK(d.b[0] == doctest::Approx(0.5));
  CHECK(d.b[3] == 1.0);
}

TEST_CASE("toxicity model values") {
  CHECK(tox_probability(BlrmParams{}, 1.0, 1.0) == doctest::Approx(0.75));
  BlrmParams low{-30.0, 0.0, -30.0, 0.0, 0.0};
  CHECK(tox_probability(low, 1.0, 1.0) < 1e-12);
  // One drug alone at log alpha = 0 and full dose gives odds 1.
  BlrmParams solo{0.0, 0.0, -60.0, 0.0, 0.0};
  CHECK(tox_probability(solo, 1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("toxicity surface is monotone in both doses without negative interaction") {
  Rng rng(3);
  const auto doses = dose_rescale(paper_grid());
  for (int k = 0; k < 200; ++k) {
    BlrmParams p{rng.normal() - 1.0, 0.5 * rng.normal(), rng.normal() - 1.0, 0.5 * rng.normal(),
                 std::fabs(rng.normal())};
    const auto s = tox_surface(p, doses);
    for (int i = 1; i <= 4; ++i)
      for (int j = 1; j <= 4; ++j) {
        if (i < 4) CHECK(s[Cell{i + 1, j}] >= s[Cell{i, j}]);
        if (j < 4) CHECK(s[Cell{i, j + 1}] >= s[Cell{i, j}]);
      }
  }
}

TEST_CASE("log posterior: zero data equals the prior, one cell by hand") {
  const DoseGrid g = paper_grid();
  const auto full = SubsetMask::full(g);
  const auto prior = BlrmPrior::weakly_informative();
  const BlrmParams p{-0.5, 0.1, -0.9, -0.2, 0.3};
  const auto empty = TrialState::start(g);
  CHECK(log_posterior(p, prior, empty, g, full) == doctest::Approx(log_prior_density(p, prior)));

  auto s = testing::with_counts(g, {{2, 3, 6, 2}}, Cell{2, 3});
  const auto d = dose_rescale(g);
  const double pi = tox_probability(p, d.a[1], d.b[2]);
  const double loglik = std::log(15.0) + 2 * std::log(pi) + 4 * std::log1p(-pi);
  CHECK(log_posterior(p, prior, s, g, full) - log_prior_density(p, prior) == doctest::Approx(loglik).epsilon(1e-12));

  // Likelihood contributions add across cells.
  auto s2 = testing::with_counts(g, {{1, 1, 3, 0}}, Cell{1, 1});
  auto both = testing::with_counts(g, {{2, 3, 6, 2}, {1, 1, 3, 0}}, Cell{2, 3});
  const double lp0 = log_prior_density(p, prior);
  CHECK(log_posterior(p, prior, both, g, full) - lp0 ==
        doctest::Approx((log_posterior(p, prior, s, g, full) - lp0) + (log_posterior(p, prior, s2, g, full) - lp0)));
}

TEST_CASE("prior density is a product of the stated normals") {
  const auto prior = BlrmPrior::weakly_informative();
  CHECK(prior.mu_alpha_a == doctest::Approx(std::log(0.33 / 0.67)));
  const BlrmParams at_mean{prior.mu_alpha_a, 0.0, prior.mu_alpha_b, 0.0, 0.0};
  const double two_pi = 2 * std::numbers::pi;
  const double expect = 2 * (-std::log(two_pi) - 0.5 * std::log(2.0)) - 0.5 * std::log(two_pi) - std::log(1.121);
  CHECK(log_prior_density(at_mean, prior) == doctest::Approx(expect));
  BlrmPrior bad = prior;
  bad.cov_a = {1.0, 2.0, 2.0, 1.0};
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
}

TEST_CASE("fit is deterministic and mixes reasonably") {
  const DoseGrid g = paper_grid();
  const auto band = testing::mask("band", g);
  const auto s = testing::with_counts(g, {{1, 1, 3, 0}, {1, 2, 3, 0}, {2, 2, 3, 1}}, Cell{2, 2});
  const auto prior = BlrmPrior::weakly_informative();
  const McmcConfig cfg;
  const auto a = fit(prior, s, g, band, cfg, 99);
  const auto b = fit(prior, s, g, band, cfg, 99);
  CHECK(a.draws == b.draws);
  CHECK(a.mean_surface == b.mean_surface);
  CHECK(a.draws.size() == 4000);
  CHECK(a.diagnostics.acceptance_rate >= 0.15);
  CHECK(a.diagnostics.acceptance_rate <= 0.5);
}

TEST_CASE("abundant data pins the posterior near the observed rate") {
  const DoseGrid g = paper_grid();
  const auto full = SubsetMask::full(g);
  const auto s = testing::with_counts(g, {{4, 4, 60, 18}}, Cell{4, 4});
  const auto f = fit(BlrmPrior::weakly_informative(), s, g, full, McmcConfig{}, 5);
  CHECK(std::fabs(f.mean_surface[Cell{4, 4}] - 0.30) < 0.05);
}

TEST_CASE("swapping the drugs transposes the fitted surface") {
  const DoseGrid g({1, 2, 3, 4}, {1, 2, 3, 4});
  const auto full = SubsetMask::full(g);
  const auto s = testing::with_counts(g, {{1, 1, 3, 0}, {2, 1, 3, 0}, {2, 2, 6, 1}, {3, 2, 3, 1}}, Cell{3, 2});
  const auto t = testing::with_counts(g, {{1, 1, 3, 0}, {1, 2, 3, 0}, {2, 2, 6, 1}, {2, 3, 3, 1}}, Cell{2, 3});
  McmcConfig cfg;
  cfg.draws = 20000;
  const auto prior = BlrmPrior::weakly_informative();
  const auto fs = fit(prior, s, g, full, cfg, 11);
  const auto ft = fit(prior, t, g, full, cfg, 12);
  for (int i = 1; i <= 4; ++i)
    for (int j = 1; j <= 4; ++j) CHECK(std::fabs(fs.mean_surface[Cell{i, j}] - ft.mean_surface[Cell{j, i}]) < 0.02);
}
