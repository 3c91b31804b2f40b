#include "boincx/io.hpp"

#include <fstream>
#include <stdexcept>

namespace boincx {

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

json to_json(Cell c) { return json::array({c.i, c.j}); }

Cell cell_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("a cell must be an [i, j] pair");
  return Cell{j[0].get<int>(), j[1].get<int>()};
}

DoseGrid grid_from_json(const json& doc) {
  return DoseGrid(doc.at("levels_a").get<std::vector<double>>(),
                  doc.at("levels_b").get<std::vector<double>>());
}

SubsetMask mask_from_json(const json& doc, const DoseGrid& grid) {
  if (!doc.contains("mask")) return SubsetMask::full(grid);
  std::vector<Cell> cells;
  for (const auto& c : doc.at("mask")) cells.push_back(cell_from_json(c));
  return SubsetMask(grid, cells);
}

json mask_to_json(const SubsetMask& mask) {
  json cells = json::array();
  for (const Cell c : mask.cells()) cells.push_back(to_json(c));
  return cells;
}

Scenario scenario_from_json(const json& doc) {
  DoseGrid grid = grid_from_json(doc);
  SubsetMask mask = mask_from_json(doc, grid);
  auto tox = matrix_from_json<double>(doc.at("true_tox"), grid.rows(), grid.cols());
  std::vector<Cell> mtc;
  for (const auto& c : doc.value("mtc", json::array())) mtc.push_back(cell_from_json(c));
  Scenario s{doc.value("name", std::string("scenario")), std::move(grid), std::move(mask),
             std::move(tox), std::move(mtc)};
  if (doc.contains("acceptable")) {
    const auto& acc = doc.at("acceptable");
    s.acceptable_lo = acc.at(0).get<double>();
    s.acceptable_hi = acc.at(1).get<double>();
  }
  validate(s);
  return s;
}

json to_json(const Scenario& s) {
  json mtc = json::array();
  for (const Cell c : s.mtc) mtc.push_back(to_json(c));
  return {{"name", s.name},
          {"levels_a", s.grid.levels_a()},
          {"levels_b", s.grid.levels_b()},
          {"mask", mask_to_json(s.mask)},
          {"true_tox", matrix_to_json(s.true_tox)},
          {"mtc", mtc},
          {"acceptable", {s.acceptable_lo, s.acceptable_hi}}};
}

Scenario load_scenario(const std::filesystem::path& path) {
  try {
    return scenario_from_json(read_json_file(path));
  } catch (const json::exception& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

SubsetMask load_mask(const std::filesystem::path& path, const DoseGrid& grid) {
  const json doc = read_json_file(path);
  if (doc.contains("levels_a") && !(grid_from_json(doc) == grid))
    throw std::invalid_argument(path.string() + ": mask grid does not match the scenario grid");
  return mask_from_json(doc, grid);
}

DesignParams params_from_json(const json& doc) {
  DesignParams p;
  p.phi = doc.value("phi", p.phi);
  const bool has_phi1 = doc.contains("phi1");
  const bool has_phi2 = doc.contains("phi2");
  p.phi1 = has_phi1 ? doc.at("phi1").get<double>() : 0.6 * p.phi;
  p.phi2 = has_phi2 ? doc.at("phi2").get<double>() : 1.4 * p.phi;
  p.epsilon = doc.value("epsilon", p.epsilon);
  if (doc.contains("epsilon_start") && !doc.at("epsilon_start").is_null())
    p.epsilon_start = doc.at("epsilon_start").get<double>();
  p.min_n_eliminate = doc.value("min_n_eliminate", p.min_n_eliminate);
  p.cohort_size = doc.value("cohort_size", p.cohort_size);
  p.max_cohorts = doc.value("max_cohorts", p.max_cohorts);
  p.earlystop_n = doc.value("earlystop_n", p.earlystop_n);
  if (doc.contains("design")) p.design = design_from_string(doc.at("design").get<std::string>());
  p.prior_a = doc.value("prior_a", p.prior_a);
  p.prior_b = doc.value("prior_b", p.prior_b);
  p.require_mtc_below_lambda_d = doc.value("require_mtc_below_lambda_d", p.require_mtc_below_lambda_d);
  if (doc.contains("mtc_tie_rule"))
    p.mtc_tie_rule = mtc_tie_rule_from_string(doc.at("mtc_tie_rule").get<std::string>());
  return derive_boundaries(p);
}

json to_json(const DesignParams& p) {
  return {{"phi", p.phi},
          {"phi1", p.phi1},
          {"phi2", p.phi2},
          {"lambda_e", p.lambda_e},
          {"lambda_d", p.lambda_d},
          {"epsilon", p.epsilon},
          {"epsilon_start", p.epsilon_start ? json(*p.epsilon_start) : json(nullptr)},
          {"min_n_eliminate", p.min_n_eliminate},
          {"cohort_size", p.cohort_size},
          {"max_cohorts", p.max_cohorts},
          {"earlystop_n", p.earlystop_n},
          {"design", to_string(p.design)},
          {"prior_a", p.prior_a},
          {"prior_b", p.prior_b},
          {"require_mtc_below_lambda_d", p.require_mtc_below_lambda_d},
          {"mtc_tie_rule", to_string(p.mtc_tie_rule)}};
}

BlrmTieBreaker blrm_from_json(const json& doc) {
  BlrmTieBreaker b;
  const double p_a = doc.value("p_star_a", 0.33);
  const double p_b = doc.value("p_star_b", 0.33);
  b.prior = BlrmPrior::weakly_informative(p_a, p_b, doc.value("eta_sd", 1.121));
  b.prior.mu_alpha_a = doc.value("mu_alpha_a", b.prior.mu_alpha_a);
  b.prior.mu_alpha_b = doc.value("mu_alpha_b", b.prior.mu_alpha_b);
  if (doc.contains("cov_a")) b.prior.cov_a = doc.at("cov_a").get<std::array<double, 4>>();
  if (doc.contains("cov_b")) b.prior.cov_b = doc.at("cov_b").get<std::array<double, 4>>();
  b.mcmc.burn_in = doc.value("burn_in", b.mcmc.burn_in);
  b.mcmc.draws = doc.value("draws", b.mcmc.draws);
  b.mcmc.initial_scale = doc.value("proposal_scale", b.mcmc.initial_scale);
  validate(b.prior);
  return b;
}

json to_json(const BlrmTieBreaker& b) {
  return {{"mu_alpha_a", b.prior.mu_alpha_a}, {"mu_alpha_b", b.prior.mu_alpha_b},
          {"cov_a", b.prior.cov_a},           {"cov_b", b.prior.cov_b},
          {"eta_sd", b.prior.eta_sd},         {"burn_in", b.mcmc.burn_in},
          {"draws", b.mcmc.draws},            {"proposal_scale", b.mcmc.initial_scale}};
}

TrialState state_from_json(const json& doc, const DoseGrid& grid) {
  TrialState s = TrialState::start(grid);
  s.n = matrix_from_json<int>(doc.at("n"), grid.rows(), grid.cols());
  s.y = matrix_from_json<int>(doc.at("y"), grid.rows(), grid.cols());
  if (doc.contains("eliminated")) {
    const auto e = matrix_from_json<int>(doc.at("eliminated"), grid.rows(), grid.cols());
    for (std::size_t k = 0; k < e.values().size(); ++k)
      s.eliminated.values()[k] = e.values()[k] ? 1 : 0;
  }
  s.current = cell_from_json(doc.at("current"));
  s.status = trial_status_from_string(doc.value("status", std::string("running")));
  for (const auto& entry : doc.value("cohort_log", json::array()))
    s.cohort_log.push_back({cell_from_json(entry.at("at")), entry.at("dlt").get<int>(),
                            entry.at("size").get<int>()});
  return s;
}

json to_json(const TrialState& s) {
  CellMap<int> elim(s.eliminated.rows(), s.eliminated.cols(), 0);
  for (std::size_t k = 0; k < elim.values().size(); ++k) elim.values()[k] = s.eliminated.values()[k];
  json log = json::array();
  for (const auto& e : s.cohort_log) log.push_back({{"at", to_json(e.at)}, {"dlt", e.dlt}, {"size", e.size}});
  return {{"n", matrix_to_json(s.n)},
          {"y", matrix_to_json(s.y)},
          {"eliminated", matrix_to_json(elim)},
          {"current", to_json(s.current)},
          {"status", to_string(s.status)},
          {"cohort_log", log}};
}

Decision decision_from_json(const json& doc) {
  Decision d;
  d.action = action_from_string(doc.at("action").get<std::string>());
  if (doc.contains("next") && !doc.at("next").is_null()) d.next = cell_from_json(doc.at("next"));
  for (const auto& c : doc.value("candidates", json::array())) d.candidates.push_back(cell_from_json(c));
  d.candidate_scores = doc.value("candidate_scores", std::vector<double>{});
  d.blrm_estimates = doc.value("blrm_estimates", std::vector<double>{});
  d.tie_break = tie_break_from_string(doc.value("tie_break", std::string("none")));
  d.rng_draws_consumed = doc.value("rng_draws_consumed", 0);
  if (doc.contains("eliminated_at") && !doc.at("eliminated_at").is_null())
    d.eliminated_at = cell_from_json(doc.at("eliminated_at"));
  return d;
}

json to_json(const Decision& d) {
  json cands = json::array();
  for (const Cell c : d.candidates) cands.push_back(to_json(c));
  return {{"action", to_string(d.action)},
          {"next", d.next ? to_json(*d.next) : json(nullptr)},
          {"candidates", cands},
          {"candidate_scores", d.candidate_scores},
          {"blrm_estimates", d.blrm_estimates},
          {"tie_break", to_string(d.tie_break)},
          {"rng_draws_consumed", d.rng_draws_consumed},
          {"eliminated_at", d.eliminated_at ? to_json(*d.eliminated_at) : json(nullptr)}};
}

json to_json(const DecisionTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"n", r.n},
                    {"escalate_if_y_le", r.escalate_if_y_le},
                    {"deescalate_if_y_ge", r.deescalate_if_y_ge},
                    {"eliminate_if_y_ge", r.eliminate_if_y_ge ? json(*r.eliminate_if_y_ge) : json(nullptr)}});
  return {{"lambda_e", t.lambda_e}, {"lambda_d", t.lambda_d}, {"rows", rows}};
}

json to_json(const IsotonicFit& fit) {
  json cells = json::array();
  for (const auto& c : fit.cells)
    cells.push_back({{"cell", to_json(c.cell)}, {"n", c.n}, {"y", c.y}, {"raw", c.raw}, {"estimate", c.estimate}});
  return {{"cells", cells}, {"sweeps", fit.sweeps}};
}

json to_json(const OperatingCharacteristics& oc) {
  return {{"pcs", oc.pcs},           {"pas", oc.pas},
          {"over_sel", oc.over_sel}, {"under_sel", oc.under_sel},
          {"none_sel", oc.none_sel}, {"mean_n", oc.mean_n},
          {"mean_dlt", oc.mean_dlt}, {"mean_pts_over_tox", oc.mean_pts_over_tox},
          {"replications", oc.replications}};
}

OperatingCharacteristics oc_from_json(const json& doc) {
  OperatingCharacteristics oc;
  oc.pcs = doc.at("pcs").get<double>();
  oc.pas = doc.at("pas").get<double>();
  oc.over_sel = doc.at("over_sel").get<double>();
  oc.under_sel = doc.value("under_sel", 0.0);
  oc.none_sel = doc.value("none_sel", 0.0);
  oc.mean_n = doc.at("mean_n").get<double>();
  oc.mean_dlt = doc.at("mean_dlt").get<double>();
  oc.mean_pts_over_tox = doc.at("mean_pts_over_tox").get<double>();
  oc.replications = doc.value("replications", 0);
  return oc;
}

json to_json(const TrialResult& r) {
  json path = json::array();
  for (const auto& e : r.path) path.push_back({{"at", to_json(e.at)}, {"dlt", e.dlt}, {"size", e.size}});
  return {{"selection", r.selection ? to_json(*r.selection) : json(nullptr)},
          {"total_n", r.total_n},
          {"total_dlt", r.total_dlt},
          {"pts_over_tox", r.pts_over_tox},
          {"stop_reason", to_string(r.stop_reason)},
          {"path", path}};
}

}  // namespace boincx
