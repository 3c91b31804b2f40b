#pragma once

// Shared domain types for dual-agent dose escalation: the dose grid, the
// admissible subset of combinations, design parameters, trial state and
// toxicity scenarios. Cells are addressed with 1-based (i, j) indices,
// i for drug A and j for drug B.

#include <compare>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace boincx {

struct Cell {
  int i = 1;
  int j = 1;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

// Componentwise partial order: lo <= hi on both axes.
constexpr bool precedes(Cell lo, Cell hi) noexcept {
  return lo.i <= hi.i && lo.j <= hi.j;
}

std::string to_string(Cell c);

class DoseGrid {
 public:
  DoseGrid(std::vector<double> levels_a, std::vector<double> levels_b);

  int rows() const noexcept { return static_cast<int>(levels_a_.size()); }
  int cols() const noexcept { return static_cast<int>(levels_b_.size()); }
  std::size_t size() const noexcept { return levels_a_.size() * levels_b_.size(); }
  const std::vector<double>& levels_a() const noexcept { return levels_a_; }
  const std::vector<double>& levels_b() const noexcept { return levels_b_; }

  bool contains(Cell c) const noexcept {
    return c.i >= 1 && c.j >= 1 && c.i <= rows() && c.j <= cols();
  }
  std::size_t index(Cell c) const;
  Cell cell_at(std::size_t index) const;
  std::string dose_label(Cell c) const;

  friend bool operator==(const DoseGrid&, const DoseGrid&) = default;

 private:
  std::vector<double> levels_a_;
  std::vector<double> levels_b_;
};

// Dense per-cell storage over an I x J grid.
template <class T>
class CellMap {
 public:
  CellMap() = default;
  CellMap(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), fill) {}

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }

  T& operator[](Cell c) { return data_[offset(c)]; }
  const T& operator[](Cell c) const { return data_[offset(c)]; }

  const std::vector<T>& values() const noexcept { return data_; }
  std::vector<T>& values() noexcept { return data_; }

  friend bool operator==(const CellMap&, const CellMap&) = default;

 private:
  std::size_t offset(Cell c) const {
    if (c.i < 1 || c.j < 1 || c.i > rows_ || c.j > cols_)
      throw std::out_of_range("cell " + to_string(c) + " outside grid");
    return static_cast<std::size_t>(c.i - 1) * static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(c.j - 1);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

// Prespecified admissible subset of the grid. Construction rejects masks
// that omit (1,1) or contain cells unreachable from (1,1) by upward
// single-axis steps inside the mask.
class SubsetMask {
 public:
  SubsetMask(const DoseGrid& grid, const std::vector<Cell>& included);

  static SubsetMask full(const DoseGrid& grid);

  int rows() const noexcept { return member_.rows(); }
  int cols() const noexcept { return member_.cols(); }
  bool contains(Cell c) const noexcept;
  bool is_full() const noexcept { return cells_.size() == member_.values().size(); }
  // Row-major order.
  const std::vector<Cell>& cells() const noexcept { return cells_; }

  friend bool operator==(const SubsetMask& a, const SubsetMask& b) {
    return a.cells_ == b.cells_ && a.rows() == b.rows() && a.cols() == b.cols();
  }

 private:
  CellMap<unsigned char> member_;
  std::vector<Cell> cells_;
};

enum class Design { boin_c, boin_cs, boin_ce, boin_cb };

std::string to_string(Design d);
Design design_from_string(const std::string& name);

enum class MtcTieRule { lower_estimate, higher_estimate };

std::string to_string(MtcTieRule r);
MtcTieRule mtc_tie_rule_from_string(const std::string& name);

struct DesignParams {
  double phi = 0.30;
  double phi1 = 0.18;
  double phi2 = 0.42;
  // Derived from (phi, phi1, phi2); see derive_boundaries().
  double lambda_e = 0.0;
  double lambda_d = 0.0;
  double epsilon = 0.95;
  // Stricter cutoff applied at (1,1) only; disabled when empty.
  std::optional<double> epsilon_start;
  int min_n_eliminate = 3;
  int cohort_size = 3;
  int max_cohorts = 15;
  // 0 disables the convergence stop.
  int earlystop_n = 9;
  Design design = Design::boin_cs;
  double prior_a = 1.0;
  double prior_b = 1.0;
  bool require_mtc_below_lambda_d = false;
  MtcTieRule mtc_tie_rule = MtcTieRule::lower_estimate;
};

// Throws std::invalid_argument naming the first violated invariant.
void validate(const DesignParams& p);

enum class TrialStatus { running, stopped_converged, stopped_max_n, stopped_safety };

std::string to_string(TrialStatus s);
TrialStatus trial_status_from_string(const std::string& name);

struct CohortEntry {
  Cell at;
  int dlt = 0;
  int size = 0;
  friend bool operator==(const CohortEntry&, const CohortEntry&) = default;
};

struct TrialState {
  CellMap<int> n;
  CellMap<int> y;
  CellMap<unsigned char> eliminated;
  Cell current{1, 1};
  TrialStatus status = TrialStatus::running;
  std::vector<CohortEntry> cohort_log;

  static TrialState start(const DoseGrid& grid);

  bool running() const noexcept { return status == TrialStatus::running; }
  bool is_eliminated(Cell c) const { return eliminated[c] != 0; }
  int cohorts() const noexcept { return static_cast<int>(cohort_log.size()); }
  int total_n() const;
  int total_dlt() const;

  friend bool operator==(const TrialState&, const TrialState&) = default;
};

// Checks the state invariants against the mask; throws std::logic_error.
void check_invariants(const TrialState& s, const SubsetMask& mask);

struct Scenario {
  std::string name;
  DoseGrid grid;
  SubsetMask mask;
  CellMap<double> true_tox;
  std::vector<Cell> mtc;
  double acceptable_lo = 0.16;
  double acceptable_hi = 0.33;
};

void validate(const Scenario& s);

// {(i+1,j), (i,j+1)} intersected with the mask, in that order.
std::vector<Cell> neighbors_up(const DoseGrid& grid, const SubsetMask& mask, Cell at);
// {(i-1,j), (i,j-1)} intersected with the mask, in that order.
std::vector<Cell> neighbors_down(const DoseGrid& grid, const SubsetMask& mask, Cell at);

// Eliminates `at` and every masked cell componentwise above it. Eliminating
// (1,1) stops the trial for safety.
TrialState mark_eliminated(TrialState state, const SubsetMask& mask, Cell at);

}  // namespace boincx
