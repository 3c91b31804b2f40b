#include "boincx/isotonic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace boincx {

std::vector<double> pava(std::span<const double> values, std::span<const double> weights) {
  if (values.size() != weights.size()) throw std::invalid_argument("pava: size mismatch");
  struct Block {
    double value;
    double weight;
    std::size_t count;
  };
  std::vector<Block> blocks;
  blocks.reserve(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!(weights[k] > 0.0)) throw std::invalid_argument("pava: weights must be positive");
    blocks.push_back({values[k], weights[k], 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].value > blocks.back().value) {
      const Block top = blocks.back();
      blocks.pop_back();
      Block& prev = blocks.back();
      const double w = prev.weight + top.weight;
      prev.value = (prev.weight * prev.value + top.weight * top.value) / w;
      prev.weight = w;
      prev.count += top.count;
    }
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (const Block& b : blocks) out.insert(out.end(), b.count, b.value);
  return out;
}

namespace {

bool strictly_below(Cell a, Cell b) { return a != b && precedes(a, b); }

// Chains whose monotonicity constraints together generate the order.
std::vector<std::vector<std::size_t>> constraint_chains(std::span<const Cell> cells) {
  const std::size_t m = cells.size();
  std::vector<std::vector<std::size_t>> chains;
  std::map<int, std::vector<std::size_t>> rows;
  std::map<int, std::vector<std::size_t>> cols;
  for (std::size_t k = 0; k < m; ++k) {
    rows[cells[k].i].push_back(k);
    cols[cells[k].j].push_back(k);
  }
  for (auto* group : {&rows, &cols}) {
    for (auto& [key, members] : *group) {
      if (members.size() < 2) continue;
      std::sort(members.begin(), members.end(),
                [&](std::size_t a, std::size_t b) { return cells[a] < cells[b]; });
      chains.push_back(members);
    }
  }
  // Covering pairs that are neither in a row nor in a column.
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      if (!strictly_below(cells[a], cells[b])) continue;
      if (cells[a].i == cells[b].i || cells[a].j == cells[b].j) continue;
      bool covering = true;
      for (std::size_t c = 0; c < m && covering; ++c)
        if (strictly_below(cells[a], cells[c]) && strictly_below(cells[c], cells[b])) covering = false;
      if (covering) chains.push_back({a, b});
    }
  }
  return chains;
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t k) {
  while (parent[k] != k) {
    parent[k] = parent[parent[k]];
    k = parent[k];
  }
  return k;
}

bool feasible(std::span<const Cell> cells, const std::vector<double>& est) {
  for (std::size_t a = 0; a < cells.size(); ++a)
    for (std::size_t b = 0; b < cells.size(); ++b)
      if (precedes(cells[a], cells[b]) && est[a] > est[b]) return false;
  return true;
}

// Replaces each level set by the exact weighted mean of its data.
std::vector<double> polish_level_sets(std::span<const Cell> cells, std::span<const double> values,
                                      std::span<const double> weights, const std::vector<double>& est,
                                      const std::vector<std::vector<std::size_t>>& chains) {
  constexpr double merge_tol = 1e-7;
  std::vector<std::size_t> parent(cells.size());
  std::iota(parent.begin(), parent.end(), 0);
  for (const auto& chain : chains)
    for (std::size_t k = 0; k + 1 < chain.size(); ++k)
      if (std::fabs(est[chain[k]] - est[chain[k + 1]]) < merge_tol)
        parent[find_root(parent, chain[k])] = find_root(parent, chain[k + 1]);
  std::vector<double> wsum(cells.size(), 0.0);
  std::vector<double> wval(cells.size(), 0.0);
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const std::size_t r = find_root(parent, k);
    wsum[r] += weights[k];
    wval[r] += weights[k] * values[k];
  }
  std::vector<double> out(cells.size());
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const std::size_t r = find_root(parent, k);
    out[k] = wval[r] / wsum[r];
  }
  return out;
}

}  // namespace

IsotonicResult isotonic_regression(std::span<const Cell> cells, std::span<const double> values,
                                   std::span<const double> weights, const IsotonicOptions& options) {
  const std::size_t m = cells.size();
  if (values.size() != m || weights.size() != m)
    throw std::invalid_argument("isotonic_regression: size mismatch");
  for (double w : weights)
    if (!(w > 0.0)) throw std::invalid_argument("isotonic_regression: weights must be positive");

  const auto chains = constraint_chains(cells);
  std::vector<double> x(values.begin(), values.end());
  std::vector<std::vector<double>> increments;
  for (const auto& chain : chains) increments.emplace_back(chain.size(), 0.0);

  IsotonicResult result;
  std::vector<double> z;
  std::vector<double> w;
  for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (std::size_t k = 0; k < chains.size(); ++k) {
      const auto& chain = chains[k];
      z.resize(chain.size());
      w.resize(chain.size());
      for (std::size_t t = 0; t < chain.size(); ++t) {
        z[t] = x[chain[t]] + increments[k][t];
        w[t] = weights[chain[t]];
      }
      const auto projected = pava(z, w);
      for (std::size_t t = 0; t < chain.size(); ++t) {
        increments[k][t] = z[t] - projected[t];
        max_change = std::max(max_change, std::fabs(projected[t] - x[chain[t]]));
        x[chain[t]] = projected[t];
      }
    }
    result.sweeps = sweep;
    if (max_change < options.tolerance) {
      result.converged = true;
      break;
    }
  }

  auto polished = polish_level_sets(cells, values, weights, x, chains);
  result.estimates = feasible(cells, polished) ? std::move(polished) : std::move(x);
  return result;
}

const IsotonicCell* IsotonicFit::find(Cell c) const {
  for (const auto& entry : cells)
    if (entry.cell == c) return &entry;
  return nullptr;
}

IsotonicFit fit_isotonic(const TrialState& state, const SubsetMask& mask) {
  IsotonicFit out;
  std::vector<Cell> cells;
  std::vector<double> values;
  std::vector<double> weights;
  for (const Cell c : mask.cells()) {
    const int n = state.n[c];
    if (n <= 0) continue;
    cells.push_back(c);
    values.push_back(static_cast<double>(state.y[c]) / n);
    weights.push_back(static_cast<double>(n));
  }
  if (cells.empty()) throw std::domain_error("isotonic fit needs at least one treated combination");
  const IsotonicResult r = isotonic_regression(cells, values, weights);
  out.sweeps = r.sweeps;
  for (std::size_t k = 0; k < cells.size(); ++k)
    out.cells.push_back({cells[k], state.n[cells[k]], state.y[cells[k]], values[k],
                         std::clamp(r.estimates[k], 0.0, 1.0)});
  return out;
}

std::optional<Cell> select_mtc(const IsotonicFit& fit, const TrialState& state,
                               const DesignParams& params, Rng* rng) {
  if (state.status == TrialStatus::stopped_safety) return std::nullopt;
  constexpr double tol = 1e-12;
  std::vector<const IsotonicCell*> admissible;
  for (const auto& entry : fit.cells) {
    if (state.is_eliminated(entry.cell)) continue;
    if (params.require_mtc_below_lambda_d && entry.estimate > params.lambda_d + tol) continue;
    admissible.push_back(&entry);
  }
  if (admissible.empty()) return std::nullopt;

  auto distance = [&](const IsotonicCell* e) { return std::fabs(e->estimate - params.phi); };
  double best = distance(admissible.front());
  for (const auto* e : admissible) best = std::min(best, distance(e));
  std::vector<const IsotonicCell*> tied;
  for (const auto* e : admissible)
    if (distance(e) <= best + tol) tied.push_back(e);

  auto keep_extreme = [&](auto key) {
    double target = key(tied.front());
    for (const auto* e : tied) target = std::max(target, key(e));
    std::vector<const IsotonicCell*> kept;
    for (const auto* e : tied)
      if (key(e) >= target - tol) kept.push_back(e);
    tied = std::move(kept);
  };
  if (params.mtc_tie_rule == MtcTieRule::lower_estimate)
    keep_extreme([](const IsotonicCell* e) { return -e->estimate; });
  else
    keep_extreme([](const IsotonicCell* e) { return e->estimate; });
  keep_extreme([](const IsotonicCell* e) { return static_cast<double>(e->n); });

  if (tied.size() == 1 || rng == nullptr) return tied.front()->cell;
  return tied[rng->uniform_index(tied.size())]->cell;
}

}  // namespace boincx
