#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "boincx/boundaries.hpp"
#include "boincx/conduct.hpp"
#include "boincx/http_service.hpp"
#include "boincx/io.hpp"
#include "boincx/isotonic.hpp"
#include "boincx/report.hpp"
#include "boincx/simulator.hpp"

namespace fs = std::filesystem;
using namespace boincx;

namespace {

void emit(const json& doc, const std::string& out) {
  if (out.empty() || out == "-")
    std::cout << doc.dump(2) << '\n';
  else
    write_json_file(out, doc);
}

void write_text(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out);
  if (!f) throw std::runtime_error("cannot write " + out);
  f << text;
}

struct StateFile {
  DoseGrid grid;
  SubsetMask mask;
  DesignParams params;
  TrialState state;
  std::optional<BlrmTieBreaker> blrm;
  std::uint64_t seed;
};

// {levels_a, levels_b, mask?, params?, state: {...}, seed?, blrm?}
StateFile load_state_file(const std::string& path) {
  const json doc = read_json_file(path);
  DoseGrid grid = grid_from_json(doc);
  SubsetMask mask = mask_from_json(doc, grid);
  DesignParams params = params_from_json(doc.value("params", json::object()));
  TrialState state = state_from_json(doc.at("state"), grid);
  check_invariants(state, mask);
  std::optional<BlrmTieBreaker> blrm;
  if (doc.contains("blrm")) blrm = blrm_from_json(doc.at("blrm"));
  if (params.design == Design::boin_cb && !blrm) blrm = BlrmTieBreaker{};
  return {std::move(grid), std::move(mask), params, std::move(state), std::move(blrm),
          doc.value("seed", std::uint64_t{0})};
}

struct DesignFlags {
  double phi = 0.30;
  std::optional<double> phi1, phi2, epsilon;
  int cohort_size = 3, max_cohorts = 15, earlystop_n = 9;
  std::string design = "boin-cs";
  bool require_below = false;

  void add_to(CLI::App* app, bool with_design) {
    app->add_option("--phi", phi, "Target DLT rate")->capture_default_str();
    app->add_option("--phi1", phi1, "Under-dosing threshold (default 0.6 phi)");
    app->add_option("--phi2", phi2, "Overdosing threshold (default 1.4 phi)");
    app->add_option("--epsilon", epsilon, "Elimination cutoff (default 0.95)");
    app->add_option("--cohort-size", cohort_size)->capture_default_str();
    app->add_option("--max-cohorts", max_cohorts)->capture_default_str();
    app->add_option("--earlystop-n", earlystop_n, "0 disables the convergence stop")->capture_default_str();
    app->add_flag("--require-below-lambda-d", require_below,
                  "Only select an MTC whose isotonic estimate is <= lambda_d");
    if (with_design)
      app->add_option("--design", design, "boin-c, boin-cs, boin-ce or boin-cb")->capture_default_str();
  }

  DesignParams params() const {
    DesignParams p;
    p.phi = phi;
    p.phi1 = phi1.value_or(0.6 * phi);
    p.phi2 = phi2.value_or(1.4 * phi);
    if (epsilon) p.epsilon = *epsilon;
    p.cohort_size = cohort_size;
    p.max_cohorts = max_cohorts;
    p.earlystop_n = earlystop_n;
    p.design = design_from_string(design);
    p.require_mtc_below_lambda_d = require_below;
    return derive_boundaries(p);
  }
};

// Paths inside a study config resolve against the config's directory.
fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::atomic<HttpService*> g_service{nullptr};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BOIN dose-finding for dual-agent combination trials over admissible subsets"};
  app.require_subcommand(1);

  // boundaries
  double b_phi = 0.30;
  std::optional<double> b_phi1, b_phi2;
  auto* boundaries = app.add_subcommand("boundaries", "Print the escalation/de-escalation boundaries");
  boundaries->add_option("--phi", b_phi)->capture_default_str();
  boundaries->add_option("--phi1", b_phi1, "default 0.6 phi");
  boundaries->add_option("--phi2", b_phi2, "default 1.4 phi");

  // table
  DesignFlags table_flags;
  int table_nmax = 0;
  bool table_csv = false;
  auto* table = app.add_subcommand("table", "Print the decision table by number treated");
  table_flags.add_to(table, false);
  table->add_option("--nmax", table_nmax, "Largest n (default cohort_size * max_cohorts)");
  table->add_flag("--csv", table_csv, "CSV instead of aligned text");

  // next-dose / select-mtc
  std::string state_path;
  std::optional<std::uint64_t> next_seed;
  auto* next = app.add_subcommand("next-dose", "Decide the next dose for a trial state file");
  next->add_option("--state", state_path, "State file")->required()->check(CLI::ExistingFile);
  next->add_option("--seed", next_seed, "Tie-break seed (overrides the file)");
  auto* select = app.add_subcommand("select-mtc", "Isotonic estimates and MTC for a trial state file");
  select->add_option("--state", state_path, "State file")->required()->check(CLI::ExistingFile);

  // simulate
  DesignFlags sim_flags;
  std::vector<std::string> sim_scenarios;
  std::string sim_mask, sim_out, sim_label;
  int sim_reps = 1000, sim_parallel = 1;
  std::uint64_t sim_seed = 42;
  bool sim_trials = false;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo operating characteristics for one design");
  simulate->add_option("--scenario", sim_scenarios, "Scenario file(s)")->required()->check(CLI::ExistingFile);
  simulate->add_option("--mask", sim_mask, "Mask file (default: full grid)")->check(CLI::ExistingFile);
  sim_flags.add_to(simulate, true);
  simulate->add_option("--reps", sim_reps)->capture_default_str();
  simulate->add_option("--seed", sim_seed, "Root seed")->capture_default_str();
  simulate->add_option("--parallel", sim_parallel, "Worker threads")->capture_default_str();
  simulate->add_option("--label", sim_label, "Config label in the output");
  simulate->add_option("--out", sim_out, "Results JSON (default stdout)");
  simulate->add_flag("--trials", sim_trials, "Include per-trial records");

  // simulate-matrix
  std::string matrix_config, matrix_out;
  int matrix_parallel = 0;
  auto* matrix = app.add_subcommand("simulate-matrix", "Scenario x configuration study from a config file");
  matrix->add_option("--config", matrix_config, "Study config JSON")->required()->check(CLI::ExistingFile);
  matrix->add_option("--out", matrix_out, "Results JSON (overrides the config)");
  matrix->add_option("--parallel", matrix_parallel, "Worker threads (overrides the config)");

  // report
  std::string report_in, report_format = "table", report_metric = "selection", report_out;
  auto* report = app.add_subcommand("report", "Render tables or figures from a results file");
  report->add_option("--in", report_in, "Results JSON")->required()->check(CLI::ExistingFile);
  report->add_option("--format", report_format, "table, csv or figure")
      ->check(CLI::IsMember({"table", "csv", "figure"}))
      ->capture_default_str();
  report->add_option("--metric", report_metric, "selection, overdose, sample_size or dlt")->capture_default_str();
  report->add_option("--out", report_out, "Output path (figure: .svg)");

  // serve
  std::string serve_host = "127.0.0.1", serve_dir = "trials";
  int serve_port = 8080;
  std::optional<std::string> serve_token;
  auto* serve = app.add_subcommand("serve", "Run the trial-conduct HTTP service");
  serve->add_option("--host", serve_host)->capture_default_str();
  serve->add_option("--port", serve_port)->capture_default_str();
  serve->add_option("--data-dir", serve_dir, "Directory of trial event logs")->capture_default_str();
  serve->add_option("--token", serve_token, "Require this bearer token");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*boundaries) {
      const auto b = lambda_boundaries(b_phi, b_phi1.value_or(0.6 * b_phi), b_phi2.value_or(1.4 * b_phi));
      std::printf("lambda_e %.6f\nlambda_d %.6f\n", b.lambda_e, b.lambda_d);
    } else if (*table) {
      const DesignParams p = table_flags.params();
      const int nmax = table_nmax > 0 ? table_nmax : p.cohort_size * p.max_cohorts;
      const auto t = decision_table(p, nmax);
      auto cell = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string("NA"); };
      if (table_csv) {
        std::printf("n,escalate_if_y_le,deescalate_if_y_ge,eliminate_if_y_ge\n");
        for (const auto& r : t.rows)
          std::printf("%d,%d,%d,%s\n", r.n, r.escalate_if_y_le, r.deescalate_if_y_ge, cell(r.eliminate_if_y_ge).c_str());
      } else {
        std::printf("lambda_e = %.4f  lambda_d = %.4f\n", t.lambda_e, t.lambda_d);
        std::printf("%4s  %12s  %14s  %13s\n", "n", "escalate y<=", "de-escalate y>=", "eliminate y>=");
        for (const auto& r : t.rows)
          std::printf("%4d  %12d  %14d  %13s\n", r.n, r.escalate_if_y_le, r.deescalate_if_y_ge,
                      cell(r.eliminate_if_y_ge).c_str());
      }
    } else if (*next) {
      const StateFile f = load_state_file(state_path);
      Rng rng(next_seed.value_or(f.seed));
      DecideOptions opts;
      if (f.blrm) opts.blrm = &*f.blrm;
      const Decision d = decide_next(f.state, f.grid, f.mask, f.params, rng, opts);
      json out = to_json(d);
      if (d.next) out["next_label"] = f.grid.dose_label(*d.next);
      emit(out, "-");
    } else if (*select) {
      const StateFile f = load_state_file(state_path);
      const IsotonicFit fit = fit_isotonic(f.state, f.mask);
      Rng rng(f.seed);
      const auto mtc = select_mtc(fit, f.state, f.params, &rng);
      emit({{"isotonic", to_json(fit)},
            {"selection", mtc ? to_json(*mtc) : json(nullptr)},
            {"selection_label", mtc ? json(f.grid.dose_label(*mtc)) : json(nullptr)}},
           "-");
    } else if (*simulate) {
      const DesignParams params = sim_flags.params();
      const std::optional<BlrmTieBreaker> blrm =
          params.design == Design::boin_cb ? std::optional<BlrmTieBreaker>(BlrmTieBreaker{}) : std::nullopt;
      json records = json::array();
      MatrixReport collected;
      for (std::size_t s = 0; s < sim_scenarios.size(); ++s) {
        const Scenario sc = load_scenario(sim_scenarios[s]);
        const SubsetMask mask = sim_mask.empty() ? SubsetMask::full(sc.grid) : load_mask(sim_mask, sc.grid);
        StudyOptions o;
        o.replications = sim_reps;
        o.root_seed = sim_seed;
        o.parallelism = sim_parallel;
        o.scenario_index = s;
        o.keep_trials = sim_trials;
        o.blrm = blrm ? &*blrm : nullptr;
        const auto study = run_study(sc, mask, params, o);
        const std::string label = sim_label.empty() ? to_string(params.design) : sim_label;
        collected.rows.push_back({sc.name, label, params.design, study.oc});
        json rec = {{"scenario", sc.name}, {"config", label}, {"design", to_string(params.design)},
                    {"oc", to_json(study.oc)}};
        if (sim_trials) {
          json trials = json::array();
          for (const auto& t : study.trials) trials.push_back(to_json(t));
          rec["trials"] = trials;
        }
        records.push_back(rec);
      }
      json doc = results_to_json(collected);
      doc["records"] = records;
      doc["root_seed"] = sim_seed;
      doc["replications"] = sim_reps;
      doc["params"] = to_json(params);
      emit(doc, sim_out);
    } else if (*matrix) {
      const fs::path cfg_path(matrix_config);
      const fs::path base = cfg_path.parent_path();
      const json cfg = read_json_file(cfg_path);
      std::vector<Scenario> scenarios;
      for (const auto& p : cfg.at("scenarios")) scenarios.push_back(load_scenario(resolve(base, p.get<std::string>())));
      if (scenarios.empty()) throw std::invalid_argument("study config lists no scenarios");
      std::vector<StudyConfig> configs;
      for (const auto& c : cfg.at("configs")) {
        const DesignParams params = params_from_json(c.value("params", json::object()));
        SubsetMask mask = c.contains("mask") ? load_mask(resolve(base, c.at("mask").get<std::string>()), scenarios[0].grid)
                                             : SubsetMask::full(scenarios[0].grid);
        std::optional<BlrmTieBreaker> blrm;
        if (c.contains("blrm")) blrm = blrm_from_json(c.at("blrm"));
        if (params.design == Design::boin_cb && !blrm) blrm = BlrmTieBreaker{};
        configs.push_back({c.value("label", to_string(params.design)), std::move(mask), params, std::move(blrm)});
      }
      const int reps = cfg.value("replications", 1000);
      const std::uint64_t seed = cfg.value("root_seed", std::uint64_t{42});
      const int parallel = matrix_parallel > 0 ? matrix_parallel : cfg.value("parallelism", 1);
      const MatrixReport m = run_matrix(scenarios, configs, reps, seed, parallel);
      json doc = results_to_json(m);
      doc["root_seed"] = seed;
      doc["replications"] = reps;
      const std::string out = !matrix_out.empty() ? matrix_out : cfg.value("out", std::string("-"));
      emit(doc, out);
      if (out != "-") std::cout << render_table(report_from_matrix(m)).text;
    } else if (*report) {
      const StudyReport r = report_from_json(read_json_file(report_in));
      if (report_format == "figure") {
        const auto metric = figure_metric_from_string(report_metric);
        if (report_out.empty() || report_out == "-")
          std::cout << render_figure_svg(r, metric);
        else
          render_figure(r, metric, report_out);
      } else {
        const auto t = render_table(r);
        write_text(report_format == "csv" ? t.csv : t.text, report_out);
      }
    } else if (*serve) {
      TrialRegistry registry(serve_dir);
      HttpService service(registry, serve_token);
      const int port = service.bind(serve_host, serve_port);
      if (port < 0) throw std::runtime_error("cannot bind " + serve_host + ":" + std::to_string(serve_port));
      g_service = &service;
      auto on_signal = [](int) {
        if (auto* s = g_service.load()) s->stop();
      };
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::fprintf(stderr, "listening on http://%s:%d (data dir %s)\n", serve_host.c_str(), port, serve_dir.c_str());
      service.listen();
      g_service = nullptr;
    }
  } catch (const ServiceError& e) {
    std::fprintf(stderr, "error [%s]: %s\n", e.code().c_str(), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
