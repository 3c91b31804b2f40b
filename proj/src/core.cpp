#include "boincx/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <sstream>

namespace boincx {

std::string to_string(Cell c) {
  return "(" + std::to_string(c.i) + "," + std::to_string(c.j) + ")";
}

namespace {

void require_strictly_increasing(const std::vector<double>& v, const char* what) {
  if (v.empty()) throw std::invalid_argument(std::string(what) + " is empty");
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!std::isfinite(v[k]) || v[k] <= 0.0)
      throw std::invalid_argument(std::string(what) + " must hold positive finite doses");
    if (k > 0 && !(v[k] > v[k - 1]))
      throw std::invalid_argument(std::string(what) + " must be strictly increasing");
  }
}

std::string format_dose(double d) {
  std::ostringstream os;
  os << d;
  return os.str();
}

}  // namespace

DoseGrid::DoseGrid(std::vector<double> levels_a, std::vector<double> levels_b)
    : levels_a_(std::move(levels_a)), levels_b_(std::move(levels_b)) {
  require_strictly_increasing(levels_a_, "levels_a");
  require_strictly_increasing(levels_b_, "levels_b");
}

std::size_t DoseGrid::index(Cell c) const {
  if (!contains(c)) throw std::out_of_range("cell " + to_string(c) + " outside grid");
  return static_cast<std::size_t>(c.i - 1) * levels_b_.size() +
         static_cast<std::size_t>(c.j - 1);
}

Cell DoseGrid::cell_at(std::size_t index) const {
  if (index >= size()) throw std::out_of_range("grid index out of range");
  const auto cols = levels_b_.size();
  return Cell{static_cast<int>(index / cols) + 1, static_cast<int>(index % cols) + 1};
}

std::string DoseGrid::dose_label(Cell c) const {
  if (!contains(c)) throw std::out_of_range("cell " + to_string(c) + " outside grid");
  return "(" + format_dose(levels_a_[c.i - 1]) + " mg, " +
         format_dose(levels_b_[c.j - 1]) + " mg)";
}

SubsetMask::SubsetMask(const DoseGrid& grid, const std::vector<Cell>& included)
    : member_(grid.rows(), grid.cols(), 0) {
  for (const Cell c : included) {
    if (!grid.contains(c))
      throw std::invalid_argument("mask cell " + to_string(c) + " lies outside the grid");
    member_[c] = 1;
  }
  if (!member_[Cell{1, 1}])
    throw std::invalid_argument("mask must include the starting combination (1,1)");

  for (int i = 1; i <= grid.rows(); ++i)
    for (int j = 1; j <= grid.cols(); ++j)
      if (member_[Cell{i, j}]) cells_.push_back(Cell{i, j});

  // Breadth-first search from (1,1) using upward moves only.
  CellMap<unsigned char> seen(grid.rows(), grid.cols(), 0);
  std::deque<Cell> frontier{Cell{1, 1}};
  seen[Cell{1, 1}] = 1;
  while (!frontier.empty()) {
    const Cell c = frontier.front();
    frontier.pop_front();
    for (const Cell next : {Cell{c.i + 1, c.j}, Cell{c.i, c.j + 1}}) {
      if (grid.contains(next) && member_[next] && !seen[next]) {
        seen[next] = 1;
        frontier.push_back(next);
      }
    }
  }
  for (const Cell c : cells_) {
    if (!seen[c])
      throw std::invalid_argument("mask cell " + to_string(c) +
                                  " is not reachable from (1,1) through admissible escalations");
  }
}

SubsetMask SubsetMask::full(const DoseGrid& grid) {
  std::vector<Cell> all;
  all.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) all.push_back(grid.cell_at(k));
  return SubsetMask(grid, all);
}

bool SubsetMask::contains(Cell c) const noexcept {
  if (c.i < 1 || c.j < 1 || c.i > rows() || c.j > cols()) return false;
  return member_[c] != 0;
}

std::string to_string(Design d) {
  switch (d) {
    case Design::boin_c: return "boin-c";
    case Design::boin_cs: return "boin-cs";
    case Design::boin_ce: return "boin-ce";
    case Design::boin_cb: return "boin-cb";
  }
  return "unknown";
}

Design design_from_string(const std::string& name) {
  std::string key;
  for (char ch : name) key.push_back(ch == '_' ? '-' : static_cast<char>(std::tolower(ch)));
  if (key == "boin-c") return Design::boin_c;
  if (key == "boin-cs") return Design::boin_cs;
  if (key == "boin-ce") return Design::boin_ce;
  if (key == "boin-cb") return Design::boin_cb;
  throw std::invalid_argument("unknown design '" + name + "'");
}

std::string to_string(MtcTieRule r) {
  return r == MtcTieRule::lower_estimate ? "lower-estimate" : "higher-estimate";
}

MtcTieRule mtc_tie_rule_from_string(const std::string& name) {
  if (name == "lower-estimate") return MtcTieRule::lower_estimate;
  if (name == "higher-estimate") return MtcTieRule::higher_estimate;
  throw std::invalid_argument("unknown MTC tie rule '" + name + "'");
}

void validate(const DesignParams& p) {
  if (!(0.0 < p.phi1 && p.phi1 < p.phi && p.phi < p.phi2 && p.phi2 < 1.0))
    throw std::invalid_argument("require 0 < phi1 < phi < phi2 < 1");
  if (!(p.lambda_e < p.phi && p.phi < p.lambda_d))
    throw std::invalid_argument("require lambda_e < phi < lambda_d (boundaries not derived?)");
  if (!(p.epsilon > 0.5 && p.epsilon < 1.0))
    throw std::invalid_argument("elimination cutoff epsilon must lie in (0.5, 1)");
  if (p.epsilon_start && !(*p.epsilon_start > 0.5 && *p.epsilon_start < 1.0))
    throw std::invalid_argument("starting-dose cutoff must lie in (0.5, 1)");
  if (p.cohort_size < 1) throw std::invalid_argument("cohort_size must be >= 1");
  if (p.max_cohorts < 1) throw std::invalid_argument("max_cohorts must be >= 1");
  if (p.earlystop_n < 0 || p.earlystop_n % p.cohort_size != 0)
    throw std::invalid_argument("earlystop_n must be a non-negative multiple of cohort_size");
  if (p.min_n_eliminate < 1) throw std::invalid_argument("min_n_eliminate must be >= 1");
  if (!(p.prior_a > 0.0 && p.prior_b > 0.0))
    throw std::invalid_argument("Beta prior shapes must be positive");
}

std::string to_string(TrialStatus s) {
  switch (s) {
    case TrialStatus::running: return "running";
    case TrialStatus::stopped_converged: return "stopped_converged";
    case TrialStatus::stopped_max_n: return "stopped_max_n";
    case TrialStatus::stopped_safety: return "stopped_safety";
  }
  return "unknown";
}

TrialStatus trial_status_from_string(const std::string& name) {
  if (name == "running") return TrialStatus::running;
  if (name == "stopped_converged") return TrialStatus::stopped_converged;
  if (name == "stopped_max_n") return TrialStatus::stopped_max_n;
  if (name == "stopped_safety") return TrialStatus::stopped_safety;
  throw std::invalid_argument("unknown trial status '" + name + "'");
}

TrialState TrialState::start(const DoseGrid& grid) {
  TrialState s;
  s.n = CellMap<int>(grid.rows(), grid.cols(), 0);
  s.y = CellMap<int>(grid.rows(), grid.cols(), 0);
  s.eliminated = CellMap<unsigned char>(grid.rows(), grid.cols(), 0);
  return s;
}

int TrialState::total_n() const {
  int total = 0;
  for (int v : n.values()) total += v;
  return total;
}

int TrialState::total_dlt() const {
  int total = 0;
  for (int v : y.values()) total += v;
  return total;
}

void check_invariants(const TrialState& s, const SubsetMask& mask) {
  for (int i = 1; i <= s.n.rows(); ++i) {
    for (int j = 1; j <= s.n.cols(); ++j) {
      const Cell c{i, j};
      if (s.y[c] < 0 || s.y[c] > s.n[c])
        throw std::logic_error("0 <= y <= n violated at " + to_string(c));
      if (s.n[c] > 0 && !mask.contains(c))
        throw std::logic_error("patients treated outside the mask at " + to_string(c));
      if (s.eliminated[c] && mask.contains(c)) {
        for (const Cell up : mask.cells())
          if (precedes(c, up) && !s.eliminated[up])
            throw std::logic_error("elimination not upward-closed above " + to_string(c));
      }
    }
  }
  if (s.running()) {
    if (!mask.contains(s.current)) throw std::logic_error("current dose outside the mask");
    if (s.eliminated[s.current]) throw std::logic_error("current dose is eliminated");
  }
}

void validate(const Scenario& s) {
  if (s.true_tox.rows() != s.grid.rows() || s.true_tox.cols() != s.grid.cols())
    throw std::invalid_argument("scenario '" + s.name + "': true_tox shape does not match grid");
  if (s.mask.rows() != s.grid.rows() || s.mask.cols() != s.grid.cols())
    throw std::invalid_argument("scenario '" + s.name + "': mask shape does not match grid");
  for (double p : s.true_tox.values())
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("scenario '" + s.name + "': toxicity outside [0,1]");
  if (!(s.acceptable_lo <= s.acceptable_hi))
    throw std::invalid_argument("scenario '" + s.name + "': acceptable interval reversed");
  for (const Cell c : s.mtc) {
    if (!s.grid.contains(c))
      throw std::invalid_argument("scenario '" + s.name + "': MTC outside grid");
    const double p = s.true_tox[c];
    if (p < s.acceptable_lo || p > s.acceptable_hi)
      throw std::invalid_argument("scenario '" + s.name + "': MTC " + to_string(c) +
                                  " outside the acceptable interval");
  }
}

namespace {

void require_in_mask(const SubsetMask& mask, Cell at) {
  if (!mask.contains(at))
    throw std::domain_error("cell " + to_string(at) + " is not an admissible combination");
}

}  // namespace

std::vector<Cell> neighbors_up(const DoseGrid& grid, const SubsetMask& mask, Cell at) {
  require_in_mask(mask, at);
  std::vector<Cell> out;
  for (const Cell c : {Cell{at.i + 1, at.j}, Cell{at.i, at.j + 1}})
    if (grid.contains(c) && mask.contains(c)) out.push_back(c);
  return out;
}

std::vector<Cell> neighbors_down(const DoseGrid& grid, const SubsetMask& mask, Cell at) {
  require_in_mask(mask, at);
  std::vector<Cell> out;
  for (const Cell c : {Cell{at.i - 1, at.j}, Cell{at.i, at.j - 1}})
    if (grid.contains(c) && mask.contains(c)) out.push_back(c);
  return out;
}

TrialState mark_eliminated(TrialState state, const SubsetMask& mask, Cell at) {
  require_in_mask(mask, at);
  for (const Cell c : mask.cells())
    if (precedes(at, c)) state.eliminated[c] = 1;
  if (state.eliminated[Cell{1, 1}]) state.status = TrialStatus::stopped_safety;
  return state;
}

}  // namespace boincx
