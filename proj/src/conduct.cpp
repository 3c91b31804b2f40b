#include "boincx/conduct.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>

#include "boincx/io.hpp"

namespace boincx {

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::uint64_t entropy64() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

std::string hex_id(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return "t" + os.str();
}

json grid_to_json(const DoseGrid& g) { return {{"levels_a", g.levels_a()}, {"levels_b", g.levels_b()}}; }

DecideOptions options_for(const TrialRecord& record) {
  DecideOptions o;
  if (record.blrm) o.blrm = &*record.blrm;
  return o;
}

[[noreturn]] void corrupt(const std::string& what) { throw ServiceError(500, "corrupt_log", what); }

}  // namespace

TrialSetup setup_from_json(const json& body) {
  try {
    if (!body.is_object()) throw std::invalid_argument("request body must be a JSON object");
    const DoseGrid grid = grid_from_json(body);
    SubsetMask mask = mask_from_json(body, grid);
    const DesignParams params = params_from_json(body.value("params", json::object()));
    TrialSetup setup{params, grid, std::move(mask), std::nullopt, std::nullopt};
    if (body.contains("blrm")) setup.blrm = blrm_from_json(body.at("blrm"));
    if (params.design == Design::boin_cb && !setup.blrm) setup.blrm = BlrmTieBreaker{};
    if (body.contains("seed") && !body.at("seed").is_null()) setup.seed = body.at("seed").get<std::uint64_t>();
    if (params.design == Design::boin_c && !setup.mask.is_full())
      throw std::invalid_argument("BOIN-C requires the full dose grid");
    return setup;
  } catch (const ServiceError&) {
    throw;
  } catch (const std::exception& e) {
    throw ServiceError(422, "invalid_trial", e.what());
  }
}

std::uint64_t decision_seed(std::uint64_t trial_seed, std::uint64_t seq) noexcept {
  return derive_seed(trial_seed, 0, 0, seq);
}

Decision next_decision(const TrialRecord& record, const TrialState& after_cohort) {
  Rng rng(decision_seed(record.seed, static_cast<std::uint64_t>(after_cohort.cohorts())));
  return decide_next(after_cohort, record.grid, record.mask, record.params, rng, options_for(record));
}

namespace {

// Applies one cohort and its decision to `record` in place.
void advance(TrialRecord& record, const CohortRequest& req, const Decision& decision) {
  TrialState s = apply_cohort(record.state, record.mask, req.at, req.dlt, record.params.cohort_size);
  s = apply_decision(std::move(s), record.mask, decision);
  if (const auto stop = check_stop(s, record.params, decision)) s.status = *stop;
  record.state = std::move(s);
  record.decisions.push_back(decision);
}

json cohort_event(const TrialRecord& record, const CohortRequest& req, const Decision& d) {
  return {{"type", "cohort"},
          {"seq", record.state.cohorts() + 1},
          {"recorded_at", utc_timestamp()},
          {"at", to_json(req.at)},
          {"dlt", req.dlt},
          {"override", req.override_recommendation},
          {"note", req.note},
          {"decision", to_json(d)}};
}

TrialRecord replay_events(const std::vector<json>& events) {
  if (events.empty() || events.front().value("type", "") != "created") corrupt("log must start with a created event");
  const json& created = events.front();
  TrialRecord record{
      created.at("trial_id").get<std::string>(),
      created.at("created_at").get<std::string>(),
      created.at("seed").get<std::uint64_t>(),
      params_from_json(created.at("params")),
      grid_from_json(created.at("grid")),
      SubsetMask::full(grid_from_json(created.at("grid"))),
      std::nullopt,
      {},
      {},
      {created}};
  record.mask = mask_from_json(created, record.grid);
  if (created.contains("blrm")) record.blrm = blrm_from_json(created.at("blrm"));
  record.state = TrialState::start(record.grid);

  for (std::size_t k = 1; k < events.size(); ++k) {
    const json& ev = events[k];
    if (ev.value("type", "") != "cohort") corrupt("unknown event type at line " + std::to_string(k + 1));
    if (ev.value("seq", -1) != record.state.cohorts() + 1) corrupt("cohort sequence gap at line " + std::to_string(k + 1));
    if (!record.state.running()) corrupt("cohort recorded after the trial stopped");
    const CohortRequest req{cell_from_json(ev.at("at")), ev.at("dlt").get<int>(), ev.value("override", false),
                            ev.value("note", std::string())};
    const TrialState after = apply_cohort(record.state, record.mask, req.at, req.dlt, record.params.cohort_size);
    const Decision recomputed = next_decision(record, after);
    if (!(recomputed == decision_from_json(ev.at("decision"))))
      corrupt("stored decision for cohort " + std::to_string(k) + " does not replay");
    advance(record, req, recomputed);
    record.events.push_back(ev);
  }
  return record;
}

}  // namespace

TrialRecord replay(const std::vector<json>& events) {
  try {
    return replay_events(events);
  } catch (const ServiceError&) {
    throw;
  } catch (const std::exception& e) {
    corrupt(std::string("malformed event log: ") + e.what());
  }
}

json to_json(const TrialRecord& r) {
  json decisions = json::array();
  for (const auto& d : r.decisions) decisions.push_back(to_json(d));
  json doc = {{"trial_id", r.trial_id},
              {"created_at", r.created_at},
              {"seed", r.seed},
              {"params", to_json(r.params)},
              {"grid", grid_to_json(r.grid)},
              {"mask", mask_to_json(r.mask)},
              {"state", to_json(r.state)},
              {"status", to_string(r.state.status)},
              {"recommendation", r.state.running() ? to_json(r.state.current) : json(nullptr)},
              {"recommendation_label", r.state.running() ? json(r.grid.dose_label(r.state.current)) : json(nullptr)},
              {"decisions", decisions},
              {"audit", r.events}};
  if (r.blrm) doc["blrm"] = to_json(*r.blrm);
  return doc;
}

TrialRegistry::TrialRegistry(std::filesystem::path data_dir) : dir_(std::move(data_dir)) {
  std::filesystem::create_directories(dir_);
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    if (entry.path().extension() != ".jsonl") continue;
    std::ifstream in(entry.path());
    std::vector<json> events;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        events.push_back(json::parse(line));
      } catch (const json::exception& e) {
        corrupt(entry.path().string() + ": " + e.what());
      }
    }
    auto e = std::make_shared<Entry>(replay(events));
    trials_.emplace(e->record.trial_id, std::move(e));
  }
}

std::filesystem::path TrialRegistry::log_path(const std::string& trial_id) const {
  return dir_ / (trial_id + ".jsonl");
}

void TrialRegistry::append(const std::string& trial_id, const json& event) const {
  std::ofstream out(log_path(trial_id), std::ios::app);
  out << event.dump() << '\n';
  out.flush();
  if (!out) throw ServiceError(500, "storage_error", "cannot append to the log of trial " + trial_id);
}

std::shared_ptr<TrialRegistry::Entry> TrialRegistry::find(const std::string& trial_id) const {
  std::shared_lock lock(registry_mutex_);
  const auto it = trials_.find(trial_id);
  if (it == trials_.end()) throw ServiceError(404, "not_found", "no trial with id '" + trial_id + "'");
  return it->second;
}

std::string TrialRegistry::create_trial(const TrialSetup& setup) {
  validate(setup.params);
  const std::uint64_t seed = setup.seed.value_or(entropy64());
  std::unique_lock lock(registry_mutex_);
  std::string id;
  do {
    id = hex_id(mix64(entropy64()));
  } while (trials_.contains(id) || std::filesystem::exists(log_path(id)));

  json created = {{"type", "created"},     {"trial_id", id},
                  {"created_at", utc_timestamp()}, {"seed", seed},
                  {"params", to_json(setup.params)}, {"grid", grid_to_json(setup.grid)},
                  {"mask", mask_to_json(setup.mask)}};
  if (setup.blrm) created["blrm"] = to_json(*setup.blrm);
  auto entry = std::make_shared<Entry>(replay({created}));
  append(id, created);
  trials_.emplace(id, std::move(entry));
  return id;
}

TrialRecord TrialRegistry::post_cohort(const std::string& trial_id, const CohortRequest& req) {
  const auto entry = find(trial_id);
  std::lock_guard lock(entry->mutex);
  TrialRecord& record = entry->record;
  if (!record.state.running())
    throw ServiceError(409, "trial_stopped", "trial has stopped (" + to_string(record.state.status) + ")");
  if (!record.grid.contains(req.at) || !record.mask.contains(req.at))
    throw ServiceError(422, "invalid_cohort", "cell " + to_string(req.at) + " is not admissible");
  if (req.at != record.state.current && !req.override_recommendation)
    throw ServiceError(409, "not_recommended",
                       "cohort at " + to_string(req.at) + " differs from the recommendation " +
                           to_string(record.state.current) + "; set override to record it anyway");
  if (req.override_recommendation && req.at != record.state.current && req.note.empty())
    throw ServiceError(422, "invalid_cohort", "an override needs an audit note");

  TrialState after;
  try {
    after = apply_cohort(record.state, record.mask, req.at, req.dlt, record.params.cohort_size);
  } catch (const std::domain_error& e) {
    throw ServiceError(422, "invalid_cohort", e.what());
  }
  const Decision decision = next_decision(record, after);
  const json event = cohort_event(record, req, decision);
  append(trial_id, event);
  advance(record, req, decision);
  record.events.push_back(event);
  return record;
}

TrialRecord TrialRegistry::get(const std::string& trial_id) const {
  const auto entry = find(trial_id);
  std::lock_guard lock(entry->mutex);
  return entry->record;
}

std::vector<std::string> TrialRegistry::list() const {
  std::shared_lock lock(registry_mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, _] : trials_) ids.push_back(id);
  return ids;
}

TrialRegistry::Selection TrialRegistry::selection(const std::string& trial_id) const {
  const TrialRecord record = get(trial_id);
  if (record.state.running()) throw ServiceError(409, "not_stopped", "the trial is still running");
  Selection out;
  if (record.state.status == TrialStatus::stopped_safety) return out;
  out.fit = fit_isotonic(record.state, record.mask);
  Rng rng(decision_seed(record.seed, 0));
  out.mtc = select_mtc(*out.fit, record.state, record.params, &rng);
  return out;
}

std::vector<WhatIfRow> TrialRegistry::what_if(const std::string& trial_id) const {
  const TrialRecord record = get(trial_id);
  std::vector<WhatIfRow> rows;
  if (!record.state.running()) return rows;
  const Cell at = record.state.current;
  for (int dlt = 0; dlt <= record.params.cohort_size; ++dlt) {
    const TrialState after = apply_cohort(record.state, record.mask, at, dlt, record.params.cohort_size);
    rows.push_back({dlt, after.n[at], after.y[at], next_decision(record, after)});
  }
  return rows;
}

}  // namespace boincx
