#include "boincx/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "boincx/boundaries.hpp"
#include "boincx/posterior.hpp"

namespace boincx {

std::string to_string(Action a) {
  switch (a) {
    case Action::escalate: return "escalate";
    case Action::stay: return "stay";
    case Action::deescalate: return "deescalate";
    case Action::eliminate_and_move: return "eliminate_and_move";
    case Action::stop: return "stop";
  }
  return "unknown";
}

Action action_from_string(const std::string& name) {
  for (Action a : {Action::escalate, Action::stay, Action::deescalate, Action::eliminate_and_move,
                   Action::stop})
    if (to_string(a) == name) return a;
  throw std::invalid_argument("unknown action '" + name + "'");
}

std::string to_string(TieBreak t) {
  switch (t) {
    case TieBreak::none: return "none";
    case TieBreak::random: return "random";
    case TieBreak::exploratory_unvisited: return "exploratory_unvisited";
    case TieBreak::blrm: return "blrm";
  }
  return "unknown";
}

TieBreak tie_break_from_string(const std::string& name) {
  for (TieBreak t : {TieBreak::none, TieBreak::random, TieBreak::exploratory_unvisited, TieBreak::blrm})
    if (to_string(t) == name) return t;
  throw std::invalid_argument("unknown tie-break kind '" + name + "'");
}

TieBreakPolicy policy_for(Design design) {
  switch (design) {
    case Design::boin_c:
    case Design::boin_cs: return TieBreakPolicy::random_uniform;
    case Design::boin_ce: return TieBreakPolicy::exploratory_then_random;
    case Design::boin_cb: return TieBreakPolicy::blrm_guided;
  }
  return TieBreakPolicy::random_uniform;
}

namespace {

enum class Direction { up, down };

struct Context {
  const TrialState& state;
  const DoseGrid& grid;
  const SubsetMask& mask;
  const DesignParams& params;
  Rng& rng;
  const DecideOptions& options;
};

std::vector<Cell> open_cells(const std::vector<Cell>& cells, const TrialState& state) {
  std::vector<Cell> out;
  for (const Cell c : cells)
    if (!state.is_eliminated(c)) out.push_back(c);
  return out;
}

std::vector<std::size_t> within_tolerance(const std::vector<double>& values, double target) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < values.size(); ++k)
    if (std::fabs(values[k] - target) <= kTieTolerance) out.push_back(k);
  return out;
}

std::size_t pick_uniform(Context& ctx, Decision& d, const std::vector<std::size_t>& tied) {
  if (ctx.options.tie_override) {
    std::vector<Cell> cells;
    for (std::size_t k : tied) cells.push_back(d.candidates[k]);
    const std::size_t choice = (*ctx.options.tie_override)(cells);
    if (choice >= tied.size()) throw std::out_of_range("tie override returned an invalid index");
    return tied[choice];
  }
  ++d.rng_draws_consumed;
  return tied[ctx.rng.uniform_index(tied.size())];
}

// Fills candidates/scores on `d` and returns the chosen cell.
Cell choose(Context& ctx, Decision& d, const std::vector<Cell>& candidates, Direction dir) {
  const auto& p = ctx.params;
  d.candidates = candidates;
  d.candidate_scores.clear();
  for (const Cell c : candidates) {
    const auto post = BetaPosterior::from_counts(ctx.state.n[c], ctx.state.y[c], p.prior_a, p.prior_b);
    d.candidate_scores.push_back(interval_prob(post, p.lambda_e, p.lambda_d));
  }
  const TieBreakPolicy policy = policy_for(p.design);

  if (policy == TieBreakPolicy::exploratory_then_random && dir == Direction::down) {
    std::vector<std::size_t> unexplored;
    std::size_t explored = 0;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      if (ctx.state.n[candidates[k]] == 0)
        unexplored.push_back(k);
      else
        ++explored;
    }
    if (unexplored.size() == 1 && explored == 1) {
      d.tie_break = TieBreak::exploratory_unvisited;
      return candidates[unexplored.front()];
    }
  }

  const double best = *std::max_element(d.candidate_scores.begin(), d.candidate_scores.end());
  const auto tied = within_tolerance(d.candidate_scores, best);

  if (policy == TieBreakPolicy::blrm_guided && candidates.size() > 1) {
    const bool untried = std::any_of(candidates.begin(), candidates.end(),
                                     [&](Cell c) { return ctx.state.n[c] == 0; });
    if (untried || tied.size() > 1) {
      if (!ctx.options.blrm) throw std::invalid_argument("BOIN-CB requires BLRM settings");
      ++d.rng_draws_consumed;
      const std::uint64_t fit_seed = ctx.rng.next_u64();
      const BlrmFit blrm = fit(ctx.options.blrm->prior, ctx.state, ctx.grid, ctx.mask,
                               ctx.options.blrm->mcmc, fit_seed);
      std::vector<double> distance;
      for (const Cell c : candidates) {
        d.blrm_estimates.push_back(blrm.mean_surface[c]);
        distance.push_back(std::fabs(blrm.mean_surface[c] - p.phi));
      }
      const double closest = *std::min_element(distance.begin(), distance.end());
      const auto nearest = within_tolerance(distance, closest);
      d.tie_break = TieBreak::blrm;
      return candidates[nearest.size() == 1 ? nearest.front() : pick_uniform(ctx, d, nearest)];
    }
  }

  if (tied.size() == 1) return candidates[tied.front()];
  d.tie_break = TieBreak::random;
  return candidates[pick_uniform(ctx, d, tied)];
}

}  // namespace

Decision decide_next(const TrialState& state, const DoseGrid& grid, const SubsetMask& mask,
                     const DesignParams& params, Rng& rng, const DecideOptions& options) {
  if (!state.running()) throw std::logic_error("decide_next called on a stopped trial");
  if (params.design == Design::boin_c && !mask.is_full())
    throw std::domain_error("BOIN-C is defined on the full dose grid; use BOIN-CS for subsets");
  const Cell cur = state.current;
  if (!mask.contains(cur)) throw std::domain_error("current dose is not admissible");
  const int n = state.n[cur];
  const int y = state.y[cur];
  if (n < 1) throw std::logic_error("decide_next requires at least one patient at the current dose");

  Context ctx{state, grid, mask, params, rng, options};
  Decision d;

  if (meets_elimination(n, y, params, elimination_cutoff(params, cur))) {
    d.eliminated_at = cur;
    if (cur == Cell{1, 1}) {
      d.action = Action::stop;
      return d;
    }
    // Cells below `cur` cannot be eliminated while `cur` is open.
    const auto down = open_cells(neighbors_down(grid, mask, cur), state);
    if (down.empty())
      throw std::logic_error("no admissible de-escalation from eliminated " + to_string(cur));
    d.action = Action::eliminate_and_move;
    d.next = choose(ctx, d, down, Direction::down);
    return d;
  }

  switch (classify_rate(n, y, params)) {
    case IntervalAction::escalate: {
      const auto up = open_cells(neighbors_up(grid, mask, cur), state);
      if (!up.empty()) {
        d.action = Action::escalate;
        d.next = choose(ctx, d, up, Direction::up);
        return d;
      }
      break;
    }
    case IntervalAction::deescalate: {
      const auto down = open_cells(neighbors_down(grid, mask, cur), state);
      if (!down.empty()) {
        d.action = Action::deescalate;
        d.next = choose(ctx, d, down, Direction::down);
        return d;
      }
      break;
    }
    case IntervalAction::stay: break;
  }
  d.action = Action::stay;
  d.next = cur;
  return d;
}

TrialState apply_cohort(TrialState state, const SubsetMask& mask, Cell at, int dlt_count,
                        int cohort_size) {
  if (!state.running()) throw std::logic_error("cannot treat patients on a stopped trial");
  if (cohort_size < 1) throw std::domain_error("cohort size must be positive");
  if (dlt_count < 0 || dlt_count > cohort_size)
    throw std::domain_error("DLT count " + std::to_string(dlt_count) + " outside [0, " +
                            std::to_string(cohort_size) + "]");
  if (!mask.contains(at)) throw std::domain_error("cell " + to_string(at) + " is not admissible");
  if (state.is_eliminated(at)) throw std::domain_error("cell " + to_string(at) + " is eliminated");
  state.n[at] += cohort_size;
  state.y[at] += dlt_count;
  state.current = at;
  state.cohort_log.push_back({at, dlt_count, cohort_size});
  return state;
}

TrialState apply_decision(TrialState state, const SubsetMask& mask, const Decision& decision) {
  if (decision.eliminated_at) state = mark_eliminated(std::move(state), mask, *decision.eliminated_at);
  if (decision.action == Action::stop) {
    state.status = TrialStatus::stopped_safety;
    return state;
  }
  if (decision.next) state.current = *decision.next;
  return state;
}

std::optional<TrialStatus> check_stop(const TrialState& state, const DesignParams& params,
                                      const Decision& last) {
  if (!state.running()) return state.status;
  if (state.is_eliminated(Cell{1, 1})) return TrialStatus::stopped_safety;
  if (params.earlystop_n > 0 && last.action == Action::stay &&
      state.n[state.current] >= params.earlystop_n)
    return TrialStatus::stopped_converged;
  if (state.cohorts() >= params.max_cohorts) return TrialStatus::stopped_max_n;
  return std::nullopt;
}

}  // namespace boincx
