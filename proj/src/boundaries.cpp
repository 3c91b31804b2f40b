#include "boincx/boundaries.hpp"

#include <cmath>
#include <stdexcept>

#include "boincx/posterior.hpp"

namespace boincx {

Boundaries lambda_boundaries(double phi, double phi1, double phi2) {
  if (!(0.0 < phi1 && phi1 < phi && phi < phi2 && phi2 < 1.0))
    throw std::domain_error("lambda_boundaries: require 0 < phi1 < phi < phi2 < 1");
  const double lambda_e =
      std::log((1.0 - phi1) / (1.0 - phi)) / std::log(phi * (1.0 - phi1) / (phi1 * (1.0 - phi)));
  const double lambda_d =
      std::log((1.0 - phi) / (1.0 - phi2)) / std::log(phi2 * (1.0 - phi) / (phi * (1.0 - phi2)));
  return {lambda_e, lambda_d};
}

DesignParams derive_boundaries(DesignParams params) {
  const Boundaries b = lambda_boundaries(params.phi, params.phi1, params.phi2);
  params.lambda_e = b.lambda_e;
  params.lambda_d = b.lambda_d;
  validate(params);
  return params;
}

DesignParams standard_params(double phi, Design design) {
  DesignParams p;
  p.phi = phi;
  p.phi1 = 0.6 * phi;
  p.phi2 = 1.4 * phi;
  p.design = design;
  return derive_boundaries(p);
}

IntervalAction classify_rate(int n, int y, const DesignParams& params) {
  if (n <= 0 || y < 0 || y > n) throw std::domain_error("classify_rate: invalid counts");
  const double rate = static_cast<double>(y) / static_cast<double>(n);
  if (rate <= params.lambda_e + kBoundaryTolerance) return IntervalAction::escalate;
  if (rate > params.lambda_d + kBoundaryTolerance) return IntervalAction::deescalate;
  return IntervalAction::stay;
}

double elimination_cutoff(const DesignParams& params, Cell at) {
  if (params.epsilon_start && at == Cell{1, 1}) return *params.epsilon_start;
  return params.epsilon;
}

bool meets_elimination(int n, int y, const DesignParams& params, double cutoff) {
  if (n < params.min_n_eliminate) return false;
  const auto post = BetaPosterior::from_counts(n, y, params.prior_a, params.prior_b);
  return overdose_prob(post, params.phi) >= cutoff;
}

DecisionTable decision_table(const DesignParams& params, int n_max) {
  if (n_max < params.cohort_size)
    throw std::domain_error("decision_table: n_max must be at least the cohort size");
  DecisionTable table{params.lambda_e, params.lambda_d, {}};
  table.rows.reserve(static_cast<std::size_t>(n_max));
  for (int n = 1; n <= n_max; ++n) {
    DecisionRow row{n, -1, n + 1, std::nullopt};
    for (int y = 0; y <= n; ++y) {
      const IntervalAction a = classify_rate(n, y, params);
      if (a == IntervalAction::escalate) row.escalate_if_y_le = y;
      if (a == IntervalAction::deescalate && row.deescalate_if_y_ge > n) row.deescalate_if_y_ge = y;
      if (!row.eliminate_if_y_ge && meets_elimination(n, y, params, params.epsilon))
        row.eliminate_if_y_ge = y;
    }
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace boincx
