#pragma once

// Live trial conduct: a registry of trials persisted as append-only JSON
// Lines event logs, one file per trial. Every state change is an event;
// loading a trial replays its log through the engine and checks that each
// recomputed decision equals the stored one.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "boincx/boundaries.hpp"
#include "boincx/core.hpp"
#include "boincx/engine.hpp"
#include "boincx/isotonic.hpp"

namespace boincx {

// Error surfaced to API clients as {code, message} with an HTTP status.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, std::string code, const std::string& message)
      : std::runtime_error(message), status_(status), code_(std::move(code)) {}
  int status() const noexcept { return status_; }
  const std::string& code() const noexcept { return code_; }

 private:
  int status_;
  std::string code_;
};

struct TrialSetup {
  DesignParams params;
  DoseGrid grid;
  SubsetMask mask;
  std::optional<BlrmTieBreaker> blrm;  // BOIN-CB only; defaults apply when absent
  std::optional<std::uint64_t> seed;   // drawn from std::random_device when absent
};

// Parses the POST /trials body: {"params": {...}, "levels_a": [...],
// "levels_b": [...], "mask": [[i, j], ...], "seed": n, "blrm": {...}}.
// The mask defaults to the full grid. Throws ServiceError(422).
TrialSetup setup_from_json(const nlohmann::json& body);

struct TrialRecord {
  std::string trial_id;
  std::string created_at;
  std::uint64_t seed = 0;
  DesignParams params;
  DoseGrid grid;
  SubsetMask mask;
  std::optional<BlrmTieBreaker> blrm;
  TrialState state;
  std::vector<Decision> decisions;  // one per cohort
  std::vector<nlohmann::json> events;
};

nlohmann::json to_json(const TrialRecord& record);

// Seed for the decision after cohort `seq` (1-based) of a trial.
std::uint64_t decision_seed(std::uint64_t trial_seed, std::uint64_t seq) noexcept;

// Rebuilds a record from its events. Throws ServiceError(500, "corrupt_log")
// when the log is malformed or a stored decision does not replay.
TrialRecord replay(const std::vector<nlohmann::json>& events);

struct CohortRequest {
  Cell at;
  int dlt = 0;
  bool override_recommendation = false;
  std::string note;
};

struct WhatIfRow {
  int dlt = 0;
  int n_total = 0;
  int y_total = 0;
  Decision decision;
};

class TrialRegistry {
 public:
  // Loads every *.jsonl log found in `data_dir`, creating the directory
  // when missing.
  explicit TrialRegistry(std::filesystem::path data_dir);

  std::string create_trial(const TrialSetup& setup);
  // Records a cohort at the current recommendation (or elsewhere with
  // override_recommendation) and returns the updated record.
  TrialRecord post_cohort(const std::string& trial_id, const CohortRequest& request);

  TrialRecord get(const std::string& trial_id) const;
  std::vector<std::string> list() const;

  // Isotonic fit and MTC; throws ServiceError(409, "not_stopped") while the
  // trial is running.
  struct Selection {
    std::optional<Cell> mtc;
    std::optional<IsotonicFit> fit;
  };
  Selection selection(const std::string& trial_id) const;

  // Decision the engine would return for each possible DLT count in the
  // next cohort at the current dose. Empty once the trial has stopped.
  std::vector<WhatIfRow> what_if(const std::string& trial_id) const;

  const std::filesystem::path& data_dir() const noexcept { return dir_; }

 private:
  struct Entry {
    explicit Entry(TrialRecord r) : record(std::move(r)) {}
    mutable std::mutex mutex;
    TrialRecord record;
  };

  std::shared_ptr<Entry> find(const std::string& trial_id) const;
  std::filesystem::path log_path(const std::string& trial_id) const;
  void append(const std::string& trial_id, const nlohmann::json& event) const;

  std::filesystem::path dir_;
  mutable std::shared_mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> trials_;
};

// Engine decision for `after_cohort` (the record's state with the latest
// cohort applied), drawn from the stream seeded by
// decision_seed(record.seed, after_cohort.cohorts()).
Decision next_decision(const TrialRecord& record, const TrialState& after_cohort);

}  // namespace boincx
