#pragma once

// Dual-agent Bayesian logistic regression model for the toxicity surface,
//
//   logit(pi_ij) = log[a1 x^b1 + a2 z^b2 + a1 a2 x^b1 z^b2] + eta x z,
//
// with x, z the doses scaled by each drug's highest level. Fitted with an
// adaptive random-walk Metropolis sampler; used only to break ties.

#include <array>
#include <cstdint>
#include <vector>

#include "boincx/core.hpp"

namespace boincx {

struct BlrmParams {
  double log_alpha1 = 0.0;
  double log_beta1 = 0.0;
  double log_alpha2 = 0.0;
  double log_beta2 = 0.0;
  double eta = 0.0;

  static constexpr std::size_t dim = 5;
  std::array<double, dim> as_array() const {
    return {log_alpha1, log_beta1, log_alpha2, log_beta2, eta};
  }
  static BlrmParams from_array(const std::array<double, dim>& v) {
    return {v[0], v[1], v[2], v[3], v[4]};
  }
  friend bool operator==(const BlrmParams&, const BlrmParams&) = default;
};

struct BlrmPrior {
  // Means of (log alpha_k, log beta_k) for drug A and drug B.
  double mu_alpha_a = 0.0;
  double mu_beta_a = 0.0;
  double mu_alpha_b = 0.0;
  double mu_beta_b = 0.0;
  // 2x2 covariance matrices, row-major {var_alpha, cov, cov, var_beta}.
  std::array<double, 4> cov_a{2.0, 0.0, 0.0, 1.0};
  std::array<double, 4> cov_b{2.0, 0.0, 0.0, 1.0};
  double eta_mean = 0.0;
  double eta_sd = 1.121;

  // mu_alpha = logit(p*), mu_beta = 0, Sigma = diag(2, 1), eta ~ N(0, eta_sd^2).
  static BlrmPrior weakly_informative(double p_star_a = 0.33, double p_star_b = 0.33,
                                      double eta_sd = 1.121);
};

void validate(const BlrmPrior& prior);

struct McmcConfig {
  int burn_in = 2000;
  int draws = 4000;
  // Multiplier on the prior Cholesky factor; adapted during burn-in.
  double initial_scale = 1.0;
  double target_acceptance = 0.3;
};

struct ScaledDoses {
  std::vector<double> a;
  std::vector<double> b;
};

// d / d_max per drug; each list ends at exactly 1.
ScaledDoses dose_rescale(const DoseGrid& grid);

// DLT probability at one scaled dose pair.
double tox_probability(const BlrmParams& params, double dose_a, double dose_b);

CellMap<double> tox_surface(const BlrmParams& params, const ScaledDoses& doses);

// Binomial log-likelihood over treated masked cells plus the prior
// log-density (bivariate normals and the normal on eta), up to a constant.
// The binomial coefficients are included so single-cell values can be
// checked by hand.
double log_posterior(const BlrmParams& params, const BlrmPrior& prior, const TrialState& data,
                     const DoseGrid& grid, const SubsetMask& mask);

double log_prior_density(const BlrmParams& params, const BlrmPrior& prior);

struct BlrmDiagnostics {
  double acceptance_rate = 0.0;
  double effective_draws = 0.0;
  double proposal_scale = 0.0;
  int restarts = 0;
};

struct BlrmFit {
  std::vector<BlrmParams> draws;
  CellMap<double> mean_surface;
  BlrmDiagnostics diagnostics;
};

class BlrmFitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Deterministic given `seed`.
BlrmFit fit(const BlrmPrior& prior, const TrialState& data, const DoseGrid& grid,
            const SubsetMask& mask, const McmcConfig& config, std::uint64_t seed);

}  // namespace boincx
