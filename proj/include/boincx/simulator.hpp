#pragma once

// Monte Carlo trial engine and operating-characteristic aggregation.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "boincx/core.hpp"
#include "boincx/engine.hpp"
#include "boincx/rng.hpp"

namespace boincx {

// DLT count for one cohort treated at `at`.
using OutcomeFn = std::function<int(Cell at, int cohort_size, Rng& rng)>;

struct TrialRun {
  TrialState state;
  std::vector<Decision> decisions;
  std::optional<Cell> selection;
};

// Runs one trial from (1,1) to a stop, drawing cohort outcomes from
// `outcome` and tie-breaks from `rng`.
TrialRun conduct_trial(const DoseGrid& grid, const SubsetMask& mask, const DesignParams& params,
                       const OutcomeFn& outcome, Rng& rng, const DecideOptions& options = {});

struct TrialResult {
  std::optional<Cell> selection;
  int total_n = 0;
  int total_dlt = 0;
  int pts_over_tox = 0;
  std::vector<CohortEntry> path;
  TrialStatus stop_reason = TrialStatus::running;

  friend bool operator==(const TrialResult&, const TrialResult&) = default;
};

TrialResult run_trial(const Scenario& scenario, const SubsetMask& mask, const DesignParams& params,
                      std::uint64_t seed, const DecideOptions& options = {});

// Percentages are on the 0-100 scale. Every selection falls in exactly one
// of: acceptable (pas), overly toxic (over_sel), below the acceptable
// interval (under_sel), or none (none_sel).
struct OperatingCharacteristics {
  double pcs = 0.0;
  double pas = 0.0;
  double over_sel = 0.0;
  double under_sel = 0.0;
  double none_sel = 0.0;
  double mean_n = 0.0;
  double mean_dlt = 0.0;
  double mean_pts_over_tox = 0.0;
  int replications = 0;

  friend bool operator==(const OperatingCharacteristics&, const OperatingCharacteristics&) = default;
};

OperatingCharacteristics summarize(const Scenario& scenario, std::span<const TrialResult> trials);

struct StudyOptions {
  int replications = 1000;
  std::uint64_t root_seed = 42;
  int parallelism = 1;
  std::uint64_t scenario_index = 0;
  std::uint64_t config_index = 0;
  bool keep_trials = false;
  const BlrmTieBreaker* blrm = nullptr;
};

struct StudyResult {
  OperatingCharacteristics oc;
  std::vector<TrialResult> trials;  // filled when keep_trials is set
};

// Replication r runs with derive_seed(root_seed, scenario_index,
// config_index, r); results do not depend on parallelism.
StudyResult run_study(const Scenario& scenario, const SubsetMask& mask, const DesignParams& params,
                      const StudyOptions& options);

struct StudyConfig {
  std::string label;
  SubsetMask mask;
  DesignParams params;
  std::optional<BlrmTieBreaker> blrm;
};

struct MatrixRow {
  std::string scenario;
  std::string config;
  Design design = Design::boin_cs;
  OperatingCharacteristics oc;
};

struct MatrixReport {
  std::vector<MatrixRow> rows;   // scenario-major
  std::vector<MatrixRow> means;  // one per config, scenario = "Mean"
};

MatrixReport run_matrix(std::span<const Scenario> scenarios, std::span<const StudyConfig> configs,
                        int replications, std::uint64_t root_seed, int parallelism = 1);

OperatingCharacteristics mean_of(std::span<const OperatingCharacteristics> ocs);

}  // namespace boincx
