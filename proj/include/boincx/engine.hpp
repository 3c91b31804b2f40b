#pragma once

// Dose-assignment rules for BOIN-C, BOIN-CS, BOIN-CE and BOIN-CB as one
// parameterized decision function over a TrialState.

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "boincx/blrm.hpp"
#include "boincx/core.hpp"
#include "boincx/rng.hpp"

namespace boincx {

enum class Action { escalate, stay, deescalate, eliminate_and_move, stop };
enum class TieBreak { none, random, exploratory_unvisited, blrm };
enum class TieBreakPolicy { random_uniform, exploratory_then_random, blrm_guided };

std::string to_string(Action a);
Action action_from_string(const std::string& name);
std::string to_string(TieBreak t);
TieBreak tie_break_from_string(const std::string& name);

TieBreakPolicy policy_for(Design design);

// Two interval probabilities closer than this are tied.
inline constexpr double kTieTolerance = 1e-12;

struct Decision {
  Action action = Action::stay;
  std::optional<Cell> next;
  // Admissible candidates in canonical order ((i+1,j) before (i,j+1), or
  // (i-1,j) before (i,j-1)), with their interval probabilities.
  std::vector<Cell> candidates;
  std::vector<double> candidate_scores;
  // Posterior mean toxicity per candidate when the BLRM was consulted.
  std::vector<double> blrm_estimates;
  TieBreak tie_break = TieBreak::none;
  int rng_draws_consumed = 0;
  // Set when the current combination met the overdose rule.
  std::optional<Cell> eliminated_at;

  friend bool operator==(const Decision&, const Decision&) = default;
};

struct BlrmTieBreaker {
  BlrmPrior prior = BlrmPrior::weakly_informative();
  McmcConfig mcmc;
};

// Replaces the seeded uniform choice among tied candidates (replay harness).
using TieOverride = std::function<std::size_t(std::span<const Cell> tied)>;

struct DecideOptions {
  const BlrmTieBreaker* blrm = nullptr;  // required for BOIN-CB
  const TieOverride* tie_override = nullptr;
};

// Next-dose decision after the latest cohort at state.current. Throws
// std::logic_error on a stopped trial or an untreated current dose.
Decision decide_next(const TrialState& state, const DoseGrid& grid, const SubsetMask& mask,
                     const DesignParams& params, Rng& rng, const DecideOptions& options = {});

// Records one cohort at `at`, which becomes the current dose.
TrialState apply_cohort(TrialState state, const SubsetMask& mask, Cell at, int dlt_count,
                        int cohort_size);

// Applies elimination, movement and safety stop carried by `decision`.
TrialState apply_decision(TrialState state, const SubsetMask& mask, const Decision& decision);

// Stop status implied by the state and the decision just applied.
std::optional<TrialStatus> check_stop(const TrialState& state, const DesignParams& params,
                                      const Decision& last);

}  // namespace boincx
