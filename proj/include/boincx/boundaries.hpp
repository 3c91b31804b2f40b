#pragma once

#include <optional>
#include <vector>

#include "boincx/core.hpp"

namespace boincx {

struct Boundaries {
  double lambda_e = 0.0;
  double lambda_d = 0.0;
};

// Closed-form escalation/de-escalation boundaries. Requires
// 0 < phi1 < phi < phi2 < 1; throws std::domain_error otherwise.
Boundaries lambda_boundaries(double phi, double phi1, double phi2);

// Fills lambda_e/lambda_d from (phi, phi1, phi2) and validates the result.
DesignParams derive_boundaries(DesignParams params);

// Standard configuration: phi1 = 0.6 phi, phi2 = 1.4 phi.
DesignParams standard_params(double phi, Design design = Design::boin_cs);

// Absolute tolerance applied when comparing y/n against the boundaries.
inline constexpr double kBoundaryTolerance = 1e-12;

enum class IntervalAction { escalate, stay, deescalate };

// escalate iff y/n <= lambda_e, de-escalate iff y/n > lambda_d.
IntervalAction classify_rate(int n, int y, const DesignParams& params);

// Cutoff in force at `at` (the starting-dose override applies at (1,1)).
double elimination_cutoff(const DesignParams& params, Cell at);

// Pr(pi > phi | n, y) >= cutoff and n >= min_n_eliminate.
bool meets_elimination(int n, int y, const DesignParams& params, double cutoff);

struct DecisionRow {
  int n = 0;
  int escalate_if_y_le = 0;
  int deescalate_if_y_ge = 0;
  std::optional<int> eliminate_if_y_ge;
};

struct DecisionTable {
  double lambda_e = 0.0;
  double lambda_d = 0.0;
  std::vector<DecisionRow> rows;  // n = 1 .. n_max
};

DecisionTable decision_table(const DesignParams& params, int n_max);

}  // namespace boincx
