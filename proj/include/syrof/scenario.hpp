#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "syrof/simworld.hpp"

namespace syrof::cli {

using Json = nlohmann::ordered_json;

/// Which theorem-level checks a run enforces (absent = not checked).
struct CheckSpec {
  std::optional<int> skew_max;        // StartManeuver round-skew bound per maneuver index
  std::optional<int> liveness_min;    // minimum StartManeuver count per robot
  bool liveness_auto = false;         // derive the minimum as floor(horizon / (k_vote + k_vote + 2))
  std::optional<int> streak_max;      // op-mode disagreement streak bound
  bool common_knowledge = false;      // byte-identical maps across COOPERATIVE starters
  std::optional<double> rmse_max;     // round-level position RMSE bound (full fidelity)
};

struct DropsSpec {
  std::string mode = "none";  // none | explicit | iid | burst
  double p = 0;
  int burst_max = 0;
  uint64_t seed = 0;
  std::vector<simworld::Loss> losses;
};

struct ScenarioConfig {
  int schema_version = 1;
  int robots = 3;
  std::vector<simworld::Pose> initial_poses;
  sync::SyncConfig sync;
  simworld::NoiseSpec noise;
  DropsSpec drops;
  int horizon = 100;
  std::string app = "noop";
  uint64_t seed = 0;
  std::string fidelity = "full";  // full | protocol
  double arena_size = 10.0;
  double max_speed = 0.5;
  double ekf_delta = 0.05;
  int steps_per_round = 20;
  CheckSpec checks;
};

/// Strict parse: schema_version pinned, unknown fields rejected at every level.
ScenarioConfig parse_config(const Json& root);
ScenarioConfig load_config(const std::string& path);

simworld::DropSchedule make_drops(const DropsSpec& spec);
simworld::WorldConfig to_world_config(const ScenarioConfig& cfg);

struct RunResult {
  std::vector<std::string> trace_lines;  // newline-delimited JSON round stream (empty when skipped)
  Json summary;
  simworld::FilterMetrics metrics;
  std::vector<simworld::StartRecord> starts;
  bool checks_passed = true;
  std::vector<std::string> violations;
};

/// keep_trace=false skips JSON serialization (sweeps run thousands of worlds).
RunResult run_scenario(const ScenarioConfig& cfg, bool keep_trace = true);

/// Recompute the summary from a parsed trace stream (the recomputability
/// contract: this must equal RunResult::summary minus nothing).
Json summarize_trace(const std::vector<std::string>& trace_lines, const ScenarioConfig& cfg);

struct SweepOptions {
  bool exhaustive = false;
  int max_losses = 2;
  uint64_t budget = 20'000'000;
  int random_n = 0;
  uint64_t seed = 0;
};

struct SweepResult {
  uint64_t schedules_run = 0;
  int worst_skew = 0;
  int worst_streak = 0;
  bool passed = true;
  Json report;
  std::optional<Json> violating_schedule;  // verbatim dump of the first failure
};

SweepResult run_sweep(const ScenarioConfig& cfg, const SweepOptions& opt);

}  // namespace syrof::cli
