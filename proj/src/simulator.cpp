#include "boincx/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "boincx/isotonic.hpp"

namespace boincx {

TrialRun conduct_trial(const DoseGrid& grid, const SubsetMask& mask, const DesignParams& params,
                       const OutcomeFn& outcome, Rng& rng, const DecideOptions& options) {
  validate(params);
  if (mask.rows() != grid.rows() || mask.cols() != grid.cols())
    throw std::invalid_argument("mask does not match the dose grid");
  TrialRun run{TrialState::start(grid), {}, std::nullopt};
  TrialState& state = run.state;
  while (state.running()) {
    const Cell at = state.current;
    const int dlt = outcome(at, params.cohort_size, rng);
    state = apply_cohort(std::move(state), mask, at, dlt, params.cohort_size);
    const Decision decision = decide_next(state, grid, mask, params, rng, options);
    state = apply_decision(std::move(state), mask, decision);
    if (const auto stop = check_stop(state, params, decision)) state.status = *stop;
    run.decisions.push_back(decision);
  }
  if (state.status != TrialStatus::stopped_safety) {
    const IsotonicFit fit = fit_isotonic(state, mask);
    run.selection = select_mtc(fit, state, params, &rng);
  }
  return run;
}

TrialResult run_trial(const Scenario& scenario, const SubsetMask& mask, const DesignParams& params,
                      std::uint64_t seed, const DecideOptions& options) {
  if (mask.rows() != scenario.grid.rows() || mask.cols() != scenario.grid.cols())
    throw std::invalid_argument("mask does not match the scenario grid");
  Rng rng(seed);
  const OutcomeFn outcome = [&](Cell at, int size, Rng& r) {
    return r.binomial(size, scenario.true_tox[at]);
  };
  const TrialRun run = conduct_trial(scenario.grid, mask, params, outcome, rng, options);

  TrialResult result;
  result.selection = run.selection;
  result.total_n = run.state.total_n();
  result.total_dlt = run.state.total_dlt();
  for (const Cell c : mask.cells())
    if (scenario.true_tox[c] > scenario.acceptable_hi) result.pts_over_tox += run.state.n[c];
  result.path = run.state.cohort_log;
  result.stop_reason = run.state.status;
  return result;
}

OperatingCharacteristics summarize(const Scenario& scenario, std::span<const TrialResult> trials) {
  OperatingCharacteristics oc;
  oc.replications = static_cast<int>(trials.size());
  if (trials.empty()) return oc;
  long correct = 0, acceptable = 0, over = 0, under = 0, none = 0;
  double sum_n = 0.0, sum_dlt = 0.0, sum_over = 0.0;
  for (const auto& t : trials) {
    sum_n += t.total_n;
    sum_dlt += t.total_dlt;
    sum_over += t.pts_over_tox;
    if (!t.selection) {
      ++none;
      continue;
    }
    const double p = scenario.true_tox[*t.selection];
    if (std::find(scenario.mtc.begin(), scenario.mtc.end(), *t.selection) != scenario.mtc.end())
      ++correct;
    if (p > scenario.acceptable_hi)
      ++over;
    else if (p < scenario.acceptable_lo)
      ++under;
    else
      ++acceptable;
  }
  const double r = static_cast<double>(trials.size());
  oc.pcs = 100.0 * static_cast<double>(correct) / r;
  oc.pas = 100.0 * static_cast<double>(acceptable) / r;
  oc.over_sel = 100.0 * static_cast<double>(over) / r;
  oc.under_sel = 100.0 * static_cast<double>(under) / r;
  oc.none_sel = 100.0 * static_cast<double>(none) / r;
  oc.mean_n = sum_n / r;
  oc.mean_dlt = sum_dlt / r;
  oc.mean_pts_over_tox = sum_over / r;
  return oc;
}

StudyResult run_study(const Scenario& scenario, const SubsetMask& mask, const DesignParams& params,
                      const StudyOptions& options) {
  if (options.replications < 1) throw std::invalid_argument("replications must be >= 1");
  validate(params);
  if (params.design == Design::boin_cb && options.blrm == nullptr)
    throw std::invalid_argument("BOIN-CB studies need BLRM settings");

  const auto reps = static_cast<std::size_t>(options.replications);
  std::vector<TrialResult> results(reps);
  DecideOptions decide;
  decide.blrm = options.blrm;

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t r = next++; r < reps; r = next++) {
      try {
        const std::uint64_t seed =
            derive_seed(options.root_seed, options.scenario_index, options.config_index, r);
        results[r] = run_trial(scenario, mask, params, seed, decide);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = reps;
      }
    }
  };
  const int threads = std::clamp(options.parallelism, 1, options.replications);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  StudyResult out;
  out.oc = summarize(scenario, results);
  if (options.keep_trials) out.trials = std::move(results);
  return out;
}

OperatingCharacteristics mean_of(std::span<const OperatingCharacteristics> ocs) {
  OperatingCharacteristics m;
  if (ocs.empty()) return m;
  for (const auto& o : ocs) {
    m.pcs += o.pcs;
    m.pas += o.pas;
    m.over_sel += o.over_sel;
    m.under_sel += o.under_sel;
    m.none_sel += o.none_sel;
    m.mean_n += o.mean_n;
    m.mean_dlt += o.mean_dlt;
    m.mean_pts_over_tox += o.mean_pts_over_tox;
    m.replications += o.replications;
  }
  const double k = static_cast<double>(ocs.size());
  m.pcs /= k;
  m.pas /= k;
  m.over_sel /= k;
  m.under_sel /= k;
  m.none_sel /= k;
  m.mean_n /= k;
  m.mean_dlt /= k;
  m.mean_pts_over_tox /= k;
  return m;
}

MatrixReport run_matrix(std::span<const Scenario> scenarios, std::span<const StudyConfig> configs,
                        int replications, std::uint64_t root_seed, int parallelism) {
  MatrixReport report;
  if (scenarios.empty()) return report;
  std::vector<std::vector<OperatingCharacteristics>> per_config(configs.size());
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    for (std::size_t c = 0; c < configs.size(); ++c) {
      const auto& cfg = configs[c];
      StudyOptions opts;
      opts.replications = replications;
      opts.root_seed = root_seed;
      opts.parallelism = parallelism;
      opts.scenario_index = s;
      opts.config_index = c;
      opts.blrm = cfg.blrm ? &*cfg.blrm : nullptr;
      const auto study = run_study(scenarios[s], cfg.mask, cfg.params, opts);
      report.rows.push_back({scenarios[s].name, cfg.label, cfg.params.design, study.oc});
      per_config[c].push_back(study.oc);
    }
  }
  for (std::size_t c = 0; c < configs.size(); ++c)
    report.means.push_back({"Mean", configs[c].label, configs[c].params.design, mean_of(per_config[c])});
  return report;
}

}  // namespace boincx
