#pragma once

// Weighted isotonic regression under the componentwise order of the dose
// grid, and the final MTC selection built on it.

#include <optional>
#include <span>
#include <vector>

#include "boincx/core.hpp"
#include "boincx/rng.hpp"

namespace boincx {

// Weighted pool-adjacent-violators fit of a nondecreasing sequence.
std::vector<double> pava(std::span<const double> values, std::span<const double> weights);

struct IsotonicOptions {
  double tolerance = 1e-10;  // max change over one sweep
  int max_sweeps = 10000;
};

struct IsotonicResult {
  std::vector<double> estimates;
  int sweeps = 0;
  bool converged = false;
};

// Weighted least-squares projection of `values` onto vectors that are
// nondecreasing along the componentwise order restricted to `cells`.
// Cyclic projections (Dykstra) over row chains, column chains and the
// remaining covering pairs, each solved exactly by PAVA.
IsotonicResult isotonic_regression(std::span<const Cell> cells, std::span<const double> values,
                                   std::span<const double> weights,
                                   const IsotonicOptions& options = {});

struct IsotonicCell {
  Cell cell;
  int n = 0;
  int y = 0;
  double raw = 0.0;
  double estimate = 0.0;
};

struct IsotonicFit {
  std::vector<IsotonicCell> cells;  // treated cells, row-major
  int sweeps = 0;

  const IsotonicCell* find(Cell c) const;
};

// Fit of y/n with weights n over treated masked cells. Throws
// std::domain_error when nothing has been treated.
IsotonicFit fit_isotonic(const TrialState& state, const SubsetMask& mask);

// Treated, non-eliminated cell whose estimate is closest to phi. Returns
// nothing after a safety stop or when no cell qualifies. Residual ties
// after the configured rule and sample size use `rng` when given, else
// the first cell in row-major order.
std::optional<Cell> select_mtc(const IsotonicFit& fit, const TrialState& state,
                               const DesignParams& params, Rng* rng = nullptr);

}  // namespace boincx
