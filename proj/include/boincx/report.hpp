#pragma once

// Operating-characteristic tables and bar-chart figures built from
// simulation output.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "boincx/simulator.hpp"

namespace boincx {

struct ReportRow {
  std::string scenario;
  std::string config;
  OperatingCharacteristics oc;
};

struct StudyReport {
  std::vector<ReportRow> rows;

  // Config labels in first-appearance order.
  std::vector<std::string> configs() const;
  // Scenario names in first-appearance order.
  std::vector<std::string> scenarios() const;
  // One "Mean" row per config, the arithmetic mean of its scenario rows.
  std::vector<ReportRow> means() const;
};

StudyReport report_from_matrix(const MatrixReport& matrix);

// Results document written by the simulate commands:
//   {"records": [{"scenario", "config", "design", "oc": {...}}, ...], ...}
StudyReport report_from_json(const nlohmann::json& doc);
nlohmann::json results_to_json(const MatrixReport& matrix);

struct RenderedTable {
  std::string text;
  std::string csv;
};

// Columns: Scenario, Config, PCS, PAS, Over, PtsOverTox, TotalDLT, TotalN.
// Each config block ends with its Mean row. Throws on an empty report.
RenderedTable render_table(const StudyReport& report);

enum class FigureMetric { selection, overdose, sample_size, dlt };

FigureMetric figure_metric_from_string(const std::string& name);
std::string to_string(FigureMetric m);

// Grouped bar chart as SVG: one cluster per scenario plus a final Mean
// cluster, one bar per config inside each cluster. For `selection`, solid
// bars show PCS and translucent bars PAS.
std::string render_figure_svg(const StudyReport& report, FigureMetric metric);
void render_figure(const StudyReport& report, FigureMetric metric, const std::filesystem::path& out);

}  // namespace boincx
