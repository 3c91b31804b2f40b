#include "boincx/blrm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "boincx/rng.hpp"

namespace boincx {

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }

// log(1 + exp(x)) without overflow.
double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double log_sum_exp3(double a, double b, double c) {
  const double m = std::max({a, b, c});
  if (m == -std::numeric_limits<double>::infinity()) return m;
  return m + std::log(std::exp(a - m) + std::exp(b - m) + std::exp(c - m));
}

double model_logit(const BlrmParams& p, double dose_a, double dose_b) {
  const double t1 = p.log_alpha1 + std::exp(p.log_beta1) * std::log(dose_a);
  const double t2 = p.log_alpha2 + std::exp(p.log_beta2) * std::log(dose_b);
  return log_sum_exp3(t1, t2, t1 + t2) + p.eta * dose_a * dose_b;
}

struct Cholesky2 {
  double l11, l21, l22;
};

Cholesky2 cholesky(const std::array<double, 4>& cov) {
  const double l11 = std::sqrt(cov[0]);
  const double l21 = cov[2] / l11;
  return {l11, l21, std::sqrt(cov[3] - l21 * l21)};
}

double bvn_log_density(double x1, double x2, double m1, double m2,
                       const std::array<double, 4>& cov) {
  const double det = cov[0] * cov[3] - cov[1] * cov[2];
  const double d1 = x1 - m1;
  const double d2 = x2 - m2;
  const double quad = (cov[3] * d1 * d1 - (cov[1] + cov[2]) * d1 * d2 + cov[0] * d2 * d2) / det;
  return -std::log(2.0 * std::numbers::pi) - 0.5 * std::log(det) - 0.5 * quad;
}

void check_covariance(const std::array<double, 4>& cov, const char* which) {
  const bool spd = cov[0] > 0.0 && cov[3] > 0.0 && cov[1] == cov[2] &&
                   cov[0] * cov[3] - cov[1] * cov[2] > 0.0;
  if (!spd)
    throw std::invalid_argument(std::string("BLRM prior covariance for drug ") + which +
                                " is not symmetric positive definite");
}

// Geyer initial positive sequence estimate of the effective sample size.
double effective_size(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 4) return static_cast<double>(n);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) s += (x[t] - mean) * (x[t + lag] - mean);
    return s / static_cast<double>(n);
  };
  const double c0 = autocov(0);
  if (c0 <= 0.0) return static_cast<double>(n);
  double tau = -1.0;
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    const double pair = (autocov(2 * k) + autocov(2 * k + 1)) / c0;
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  tau = std::max(tau, 1.0 / static_cast<double>(n));
  return std::min(static_cast<double>(n), static_cast<double>(n) / tau);
}

}  // namespace

BlrmPrior BlrmPrior::weakly_informative(double p_star_a, double p_star_b, double eta_sd) {
  BlrmPrior prior;
  prior.mu_alpha_a = logit(p_star_a);
  prior.mu_alpha_b = logit(p_star_b);
  prior.eta_sd = eta_sd;
  return prior;
}

void validate(const BlrmPrior& prior) {
  check_covariance(prior.cov_a, "A");
  check_covariance(prior.cov_b, "B");
  if (!(prior.eta_sd > 0.0)) throw std::invalid_argument("BLRM eta_sd must be positive");
}

ScaledDoses dose_rescale(const DoseGrid& grid) {
  ScaledDoses out;
  const double top_a = grid.levels_a().back();
  const double top_b = grid.levels_b().back();
  for (double d : grid.levels_a()) out.a.push_back(d / top_a);
  for (double d : grid.levels_b()) out.b.push_back(d / top_b);
  out.a.back() = 1.0;
  out.b.back() = 1.0;
  return out;
}

double tox_probability(const BlrmParams& params, double dose_a, double dose_b) {
  return 1.0 / (1.0 + std::exp(-model_logit(params, dose_a, dose_b)));
}

CellMap<double> tox_surface(const BlrmParams& params, const ScaledDoses& doses) {
  const int rows = static_cast<int>(doses.a.size());
  const int cols = static_cast<int>(doses.b.size());
  CellMap<double> surface(rows, cols, 0.0);
  for (int i = 1; i <= rows; ++i)
    for (int j = 1; j <= cols; ++j)
      surface[Cell{i, j}] = tox_probability(params, doses.a[i - 1], doses.b[j - 1]);
  return surface;
}

double log_prior_density(const BlrmParams& p, const BlrmPrior& prior) {
  const double z = (p.eta - prior.eta_mean) / prior.eta_sd;
  return bvn_log_density(p.log_alpha1, p.log_beta1, prior.mu_alpha_a, prior.mu_beta_a, prior.cov_a) +
         bvn_log_density(p.log_alpha2, p.log_beta2, prior.mu_alpha_b, prior.mu_beta_b, prior.cov_b) -
         0.5 * std::log(2.0 * std::numbers::pi) - std::log(prior.eta_sd) - 0.5 * z * z;
}

namespace {

struct LikelihoodTerm {
  double dose_a;
  double dose_b;
  int n;
  int y;
  double log_choose;
};

std::vector<LikelihoodTerm> likelihood_terms(const TrialState& data, const DoseGrid& grid,
                                             const SubsetMask& mask) {
  const ScaledDoses doses = dose_rescale(grid);
  std::vector<LikelihoodTerm> terms;
  for (const Cell c : mask.cells()) {
    const int n = data.n[c];
    if (n <= 0) continue;
    const int y = data.y[c];
    const double log_choose = std::lgamma(n + 1.0) - std::lgamma(y + 1.0) - std::lgamma(n - y + 1.0);
    terms.push_back({doses.a[c.i - 1], doses.b[c.j - 1], n, y, log_choose});
  }
  return terms;
}

double log_posterior_terms(const BlrmParams& p, const BlrmPrior& prior,
                           const std::vector<LikelihoodTerm>& terms) {
  double total = log_prior_density(p, prior);
  for (const auto& t : terms) {
    const double eta = model_logit(p, t.dose_a, t.dose_b);
    // log pi = -softplus(-eta), log(1 - pi) = -softplus(eta)
    total += t.log_choose - t.y * softplus(-eta) - (t.n - t.y) * softplus(eta);
  }
  return total;
}

}  // namespace

double log_posterior(const BlrmParams& params, const BlrmPrior& prior, const TrialState& data,
                     const DoseGrid& grid, const SubsetMask& mask) {
  return log_posterior_terms(params, prior, likelihood_terms(data, grid, mask));
}

BlrmFit fit(const BlrmPrior& prior, const TrialState& data, const DoseGrid& grid,
            const SubsetMask& mask, const McmcConfig& config, std::uint64_t seed) {
  validate(prior);
  if (config.burn_in < 0 || config.draws < 1)
    throw std::invalid_argument("MCMC config requires burn_in >= 0 and draws >= 1");
  if (!(config.initial_scale > 0.0) || !(config.target_acceptance > 0.0 && config.target_acceptance < 1.0))
    throw std::invalid_argument("MCMC config has invalid scale or target acceptance");

  const auto terms = likelihood_terms(data, grid, mask);
  Rng rng(seed);
  const Cholesky2 la = cholesky(prior.cov_a);
  const Cholesky2 lb = cholesky(prior.cov_b);

  // Gaussian step with the prior's covariance shape.
  auto prior_shaped = [&](const std::array<double, 5>& z) {
    return std::array<double, 5>{la.l11 * z[0], la.l21 * z[0] + la.l22 * z[1],
                                 lb.l11 * z[2], lb.l21 * z[2] + lb.l22 * z[3],
                                 prior.eta_sd * z[4]};
  };
  auto standard_normals = [&] {
    std::array<double, 5> z{};
    for (double& v : z) v = rng.normal();
    return z;
  };

  const BlrmParams prior_mean{prior.mu_alpha_a, prior.mu_beta_a, prior.mu_alpha_b, prior.mu_beta_b,
                              prior.eta_mean};
  BlrmParams current = prior_mean;
  double current_lp = log_posterior_terms(current, prior, terms);
  BlrmDiagnostics diag;
  constexpr int max_restarts = 20;
  while (!std::isfinite(current_lp)) {
    if (diag.restarts == max_restarts)
      throw BlrmFitError("BLRM log-posterior is not finite at any starting point");
    ++diag.restarts;
    const auto step = prior_shaped(standard_normals());
    auto v = prior_mean.as_array();
    for (std::size_t k = 0; k < v.size(); ++k) v[k] += step[k];
    current = BlrmParams::from_array(v);
    current_lp = log_posterior_terms(current, prior, terms);
  }

  double log_scale = std::log(config.initial_scale * 2.38 / std::sqrt(5.0));
  const int total = config.burn_in + config.draws;
  BlrmFit out;
  out.draws.reserve(static_cast<std::size_t>(config.draws));
  int accepted_kept = 0;

  for (int t = 0; t < total; ++t) {
    const double scale = std::exp(log_scale);
    const auto step = prior_shaped(standard_normals());
    auto v = current.as_array();
    for (std::size_t k = 0; k < v.size(); ++k) v[k] += scale * step[k];
    const BlrmParams proposal = BlrmParams::from_array(v);
    const double proposal_lp = log_posterior_terms(proposal, prior, terms);
    const double log_ratio = proposal_lp - current_lp;
    const double accept_prob =
        std::isfinite(proposal_lp) ? (log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio)) : 0.0;
    const bool accept = rng.uniform() < accept_prob;
    if (accept) {
      current = proposal;
      current_lp = proposal_lp;
    }
    if (t < config.burn_in) {
      // Robbins-Monro step on log scale, frozen once burn-in ends.
      const double gain = 1.0 / std::pow(static_cast<double>(t) + 1.0, 0.6);
      log_scale += gain * (accept_prob - config.target_acceptance);
    } else {
      out.draws.push_back(current);
      if (accept) ++accepted_kept;
    }
  }

  const ScaledDoses doses = dose_rescale(grid);
  out.mean_surface = CellMap<double>(grid.rows(), grid.cols(), 0.0);
  for (const auto& d : out.draws) {
    const auto surface = tox_surface(d, doses);
    for (std::size_t k = 0; k < surface.values().size(); ++k)
      out.mean_surface.values()[k] += surface.values()[k];
  }
  for (double& v : out.mean_surface.values()) v /= static_cast<double>(out.draws.size());

  diag.acceptance_rate = static_cast<double>(accepted_kept) / static_cast<double>(config.draws);
  diag.proposal_scale = std::exp(log_scale);
  double ess = static_cast<double>(config.draws);
  for (std::size_t k = 0; k < BlrmParams::dim; ++k) {
    std::vector<double> trace;
    trace.reserve(out.draws.size());
    for (const auto& d : out.draws) trace.push_back(d.as_array()[k]);
    ess = std::min(ess, effective_size(trace));
  }
  diag.effective_draws = ess;
  out.diagnostics = diag;
  return out;
}

}  // namespace boincx
