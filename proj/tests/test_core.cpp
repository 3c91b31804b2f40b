#include <doctest.h>

#include <algorithm>
#include <set>

#include "boincx/core.hpp"
#include "boincx/rng.hpp"
#include "test_support.hpp"

using namespace boincx;
using testing::paper_grid;

namespace {

std::set<Cell> eliminated_cells(const TrialState& s, const SubsetMask& mask) {
  std::set<Cell> out;
  for (Cell c : mask.cells())
    if (s.is_eliminated(c)) out.insert(c);
  return out;
}

}  // namespace

TEST_CASE("dose grid validates levels and labels cells") {
  const DoseGrid g = paper_grid();
  CHECK(g.rows() == 4);
  CHECK(g.cols() == 4);
  CHECK(g.dose_label(Cell{3, 4}) == "(50 mg, 240 mg)");
  CHECK(g.cell_at(g.index(Cell{2, 3})) == Cell{2, 3});
  CHECK_THROWS_AS(DoseGrid({10, 10}, {1}), std::invalid_argument);
  CHECK_THROWS_AS(DoseGrid({}, {1}), std::invalid_argument);
  CHECK_THROWS_AS(DoseGrid({20, 10}, {1}), std::invalid_argument);
}

TEST_CASE("mask construction enforces (1,1) and connectivity") {
  const DoseGrid g = paper_grid();
  CHECK_THROWS_AS(SubsetMask(g, {{1, 2}, {2, 2}}), std::invalid_argument);
  CHECK_THROWS_AS(SubsetMask(g, {{1, 1}, {3, 3}}), std::invalid_argument);
  CHECK_THROWS_AS(SubsetMask(g, {{1, 1}, {5, 1}}), std::invalid_argument);
  CHECK_NOTHROW(SubsetMask(g, {{1, 1}, {2, 1}, {2, 2}}));
  CHECK(SubsetMask::full(g).is_full());
  CHECK(SubsetMask::full(g).cells().size() == 16);
}

TEST_CASE("neighbors_up examples") {
  const DoseGrid g = paper_grid();
  const auto band = testing::mask("band", g);
  const auto full = SubsetMask::full(g);
  CHECK(neighbors_up(g, band, Cell{2, 2}) == std::vector<Cell>{{2, 3}});
  CHECK(neighbors_up(g, full, Cell{4, 4}).empty());
  CHECK(neighbors_up(g, full, Cell{2, 2}) == std::vector<Cell>{{3, 2}, {2, 3}});
  CHECK_THROWS_AS(neighbors_up(g, band, Cell{3, 2}), std::domain_error);
}

TEST_CASE("neighbors_down examples") {
  const DoseGrid g = paper_grid();
  const auto band = testing::mask("band", g);
  const auto full = SubsetMask::full(g);
  CHECK(neighbors_down(g, full, Cell{1, 1}).empty());
  CHECK(neighbors_down(g, band, Cell{4, 4}) == std::vector<Cell>{{3, 4}, {4, 3}});
  CHECK(neighbors_down(g, band, Cell{2, 3}) == std::vector<Cell>{{2, 2}});
}

TEST_CASE("neighbors stay inside the mask and never return the query cell") {
  const DoseGrid g = paper_grid();
  for (const char* name : {"full", "band", "case_study", "mono_path"}) {
    const auto m = testing::mask(name, g);
    for (Cell c : m.cells()) {
      for (const auto& set : {neighbors_up(g, m, c), neighbors_down(g, m, c)}) {
        for (Cell n : set) {
          CHECK(m.contains(n));
          CHECK(n != c);
        }
      }
    }
  }
}

TEST_CASE("every masked cell is reachable from (1,1) by upward moves") {
  const DoseGrid g = paper_grid();
  for (const char* name : {"full", "band", "case_study", "mono_path"}) {
    const auto m = testing::mask(name, g);
    std::set<Cell> seen{{1, 1}};
    std::vector<Cell> frontier{{1, 1}};
    while (!frontier.empty()) {
      const Cell c = frontier.back();
      frontier.pop_back();
      for (Cell n : neighbors_up(g, m, c))
        if (seen.insert(n).second) frontier.push_back(n);
    }
    CHECK(seen.size() == m.cells().size());
  }
}

TEST_CASE("mark_eliminated examples") {
  const DoseGrid g = paper_grid();
  const auto full = SubsetMask::full(g);
  const auto band = testing::mask("band", g);

  auto s = mark_eliminated(TrialState::start(g), full, Cell{3, 3});
  CHECK(eliminated_cells(s, full) == std::set<Cell>{{3, 3}, {3, 4}, {4, 3}, {4, 4}});
  CHECK(s.running());

  s = mark_eliminated(TrialState::start(g), full, Cell{1, 1});
  CHECK(eliminated_cells(s, full).size() == 16);
  CHECK(s.status == TrialStatus::stopped_safety);

  s = mark_eliminated(TrialState::start(g), band, Cell{3, 4});
  CHECK(eliminated_cells(s, band) == std::set<Cell>{{3, 4}, {4, 4}});
  CHECK_FALSE(s.is_eliminated(Cell{4, 3}));
}

TEST_CASE("elimination stays upward-closed under random call sequences") {
  const DoseGrid g = paper_grid();
  Rng rng(20240611);
  for (const char* name : {"full", "band", "case_study"}) {
    const auto m = testing::mask(name, g);
    for (int trial = 0; trial < 300; ++trial) {
      TrialState s = TrialState::start(g);
      const int calls = 1 + static_cast<int>(rng.uniform_index(5));
      for (int k = 0; k < calls; ++k) {
        const Cell at = m.cells()[rng.uniform_index(m.cells().size())];
        if (at == Cell{1, 1}) continue;
        s = mark_eliminated(std::move(s), m, at);
        s.current = Cell{1, 1};
        CHECK_NOTHROW(check_invariants(s, m));
      }
    }
  }
}

TEST_CASE("design parameter validation") {
  DesignParams p;
  p.lambda_e = 0.236;
  p.lambda_d = 0.359;
  CHECK_NOTHROW(validate(p));
  auto bad = p;
  bad.phi1 = 0.35;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = p;
  bad.epsilon = 0.4;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = p;
  bad.earlystop_n = 10;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = p;
  bad.cohort_size = 0;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  CHECK(design_from_string("BOIN-CE") == Design::boin_ce);
  CHECK(to_string(Design::boin_cb) == "boin-cb");
  CHECK_THROWS_AS(design_from_string("crm"), std::invalid_argument);
}

TEST_CASE("state invariants catch violations") {
  const DoseGrid g = paper_grid();
  const auto band = testing::mask("band", g);
  auto s = TrialState::start(g);
  s.n[Cell{1, 1}] = 3;
  s.y[Cell{1, 1}] = 4;
  CHECK_THROWS_AS(check_invariants(s, band), std::logic_error);
  s.y[Cell{1, 1}] = 1;
  CHECK_NOTHROW(check_invariants(s, band));
  s.n[Cell{3, 2}] = 3;
  CHECK_THROWS_AS(check_invariants(s, band), std::logic_error);
  s.n[Cell{3, 2}] = 0;
  s.eliminated[Cell{3, 3}] = 1;
  CHECK_THROWS_AS(check_invariants(s, band), std::logic_error);
}

TEST_CASE("shipped scenarios are valid and carry their MTC sets") {
  for (int k = 1; k <= 14; ++k) {
    const Scenario s = testing::scenario(k);
    CHECK_NOTHROW(validate(s));
    for (Cell c : s.mtc) CHECK(s.true_tox[c] == doctest::Approx(0.30));
  }
  CHECK(testing::scenario(14).mtc.empty());
  CHECK(testing::scenario(6).mtc.size() == 3);
  CHECK(testing::scenario(5).true_tox[Cell{3, 3}] == doctest::Approx(0.30));
}
