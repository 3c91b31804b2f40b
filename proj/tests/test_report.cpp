#include <doctest.h>

#include <sstream>

#include "boincx/io.hpp"
#include "boincx/report.hpp"

using namespace boincx;

namespace {

OperatingCharacteristics oc_with(double pcs, double n) {
  OperatingCharacteristics oc;
  oc.pcs = pcs;
  oc.pas = pcs + 10;
  oc.over_sel = 5;
  oc.under_sel = 100 - oc.pas - 5;
  oc.mean_n = n;
  oc.mean_dlt = n / 4;
  oc.mean_pts_over_tox = 2.5;
  oc.replications = 1000;
  return oc;
}

StudyReport fourteen_by_two() {
  StudyReport r;
  for (int s = 1; s <= 14; ++s)
    for (const char* cfg : {"BOIN-CS", "BOIN-CE"})
      r.rows.push_back({"Scenario " + std::to_string(s), cfg, oc_with(s * 3.0, 30 + s)});
  return r;
}

int count(const std::string& hay, const std::string& needle) {
  int k = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++k;
  return k;
}

}  // namespace

TEST_CASE("figure has one cluster per scenario plus the mean") {
  const auto svg = render_figure_svg(fourteen_by_two(), FigureMetric::selection);
  CHECK(count(svg, "<g class=\"cluster\"") == 15);
  CHECK(count(svg, "data-scenario=\"Mean\"") == 1);
  CHECK(count(svg, "fill-opacity=\"0.35\"") == 30);
  const auto dose = render_figure_svg(fourteen_by_two(), FigureMetric::sample_size);
  CHECK(count(dose, "fill-opacity") == 0);

  StudyReport one;
  one.rows.push_back({"Scenario 3", "BOIN-CS", oc_with(40, 33)});
  CHECK(count(render_figure_svg(one, FigureMetric::overdose), "<g class=\"cluster\"") == 2);
}

TEST_CASE("empty reports and unknown metrics are rejected") {
  CHECK_THROWS_AS(render_table(StudyReport{}), std::invalid_argument);
  CHECK_THROWS_AS(render_figure_svg(StudyReport{}, FigureMetric::dlt), std::invalid_argument);
  CHECK_THROWS_AS(figure_metric_from_string("toxicity"), std::invalid_argument);
  for (auto m : {FigureMetric::selection, FigureMetric::overdose, FigureMetric::sample_size, FigureMetric::dlt})
    CHECK(figure_metric_from_string(to_string(m)) == m);
}

TEST_CASE("single-scenario mean equals its row") {
  StudyReport one;
  one.rows.push_back({"Scenario 3", "BOIN-CS", oc_with(40, 33)});
  const auto means = one.means();
  REQUIRE(means.size() == 1);
  CHECK(means[0].oc == one.rows[0].oc);
  const auto table = render_table(one);
  CHECK(count(table.csv, "\n") == 3);
  CHECK(table.csv.find("Mean,BOIN-CS,40.0,50.0,5.0,2.5,8.2,33.0") != std::string::npos);
}

TEST_CASE("table blocks are per config and the csv round-trips to one decimal") {
  const auto report = fourteen_by_two();
  const auto t = render_table(report);
  std::istringstream in(t.csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "Scenario,Config,PCS,PAS,Over,PtsOverTox,TotalDLT,TotalN");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  REQUIRE(rows.size() == 30);
  CHECK(rows[14][0] == "Mean");
  CHECK(rows[14][1] == "BOIN-CS");
  CHECK(rows[15][1] == "BOIN-CE");
  for (std::size_t k = 0; k < 14; ++k) {
    CHECK(std::stod(rows[k][2]) == doctest::Approx(report.rows[2 * k].oc.pcs).epsilon(0.05));
    CHECK(std::stod(rows[k][7]) == doctest::Approx(report.rows[2 * k].oc.mean_n).epsilon(0.05));
  }
  CHECK(std::stod(rows[14][2]) == doctest::Approx(22.5));
}

TEST_CASE("results documents round-trip through json") {
  MatrixReport m;
  m.rows.push_back({"Scenario 1", "cs", Design::boin_cs, oc_with(12.5, 30)});
  m.rows.push_back({"Scenario 1", "ce", Design::boin_ce, oc_with(14.0, 31)});
  m.means.push_back({"Mean", "cs", Design::boin_cs, oc_with(12.5, 30)});
  const auto doc = json::parse(results_to_json(m).dump());
  const auto back = report_from_json(doc);
  REQUIRE(back.rows.size() == 2);
  CHECK(back.rows[1].config == "ce");
  CHECK(back.rows[1].oc == m.rows[1].oc);
  CHECK_THROWS_AS(report_from_json(json::object()), std::invalid_argument);
}
