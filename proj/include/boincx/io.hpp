#pragma once

// JSON mapping for the file formats: scenario files, mask files, design
// parameters, trial state documents and simulation results. Cell indices
// are written as 1-based [i, j] pairs; matrices are row-major nested arrays.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "boincx/blrm.hpp"
#include "boincx/boundaries.hpp"
#include "boincx/core.hpp"
#include "boincx/engine.hpp"
#include "boincx/isotonic.hpp"
#include "boincx/simulator.hpp"

namespace boincx {

using json = nlohmann::json;

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& doc);

json to_json(Cell c);
Cell cell_from_json(const json& j);

DoseGrid grid_from_json(const json& doc);
SubsetMask mask_from_json(const json& doc, const DoseGrid& grid);
json mask_to_json(const SubsetMask& mask);

Scenario scenario_from_json(const json& doc);
json to_json(const Scenario& s);
Scenario load_scenario(const std::filesystem::path& path);
// Mask file: {levels_a, levels_b, mask}. The grid must match `grid`.
SubsetMask load_mask(const std::filesystem::path& path, const DoseGrid& grid);

// Missing fields take their defaults; lambdas are always re-derived.
DesignParams params_from_json(const json& doc);
json to_json(const DesignParams& p);

BlrmTieBreaker blrm_from_json(const json& doc);
json to_json(const BlrmTieBreaker& b);

TrialState state_from_json(const json& doc, const DoseGrid& grid);
json to_json(const TrialState& s);

Decision decision_from_json(const json& doc);
json to_json(const Decision& d);

json to_json(const DecisionTable& t);
json to_json(const IsotonicFit& fit);
json to_json(const OperatingCharacteristics& oc);
OperatingCharacteristics oc_from_json(const json& doc);
json to_json(const TrialResult& r);

template <class T>
json matrix_to_json(const CellMap<T>& m) {
  json rows = json::array();
  for (int i = 1; i <= m.rows(); ++i) {
    json row = json::array();
    for (int j = 1; j <= m.cols(); ++j) row.push_back(m[Cell{i, j}]);
    rows.push_back(std::move(row));
  }
  return rows;
}

template <class T>
CellMap<T> matrix_from_json(const json& rows, int expect_rows, int expect_cols) {
  if (!rows.is_array() || static_cast<int>(rows.size()) != expect_rows)
    throw std::invalid_argument("matrix has the wrong number of rows");
  CellMap<T> m(expect_rows, expect_cols);
  for (int i = 1; i <= expect_rows; ++i) {
    const json& row = rows[static_cast<std::size_t>(i - 1)];
    if (!row.is_array() || static_cast<int>(row.size()) != expect_cols)
      throw std::invalid_argument("matrix has the wrong number of columns");
    for (int j = 1; j <= expect_cols; ++j) m[Cell{i, j}] = row[static_cast<std::size_t>(j - 1)].get<T>();
  }
  return m;
}

}  // namespace boincx
