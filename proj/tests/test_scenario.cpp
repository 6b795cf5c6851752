#include <doctest.h>

#include "syrof/scenario.hpp"

using namespace syrof;
using namespace syrof::cli;

namespace {

Json minimal_config() {
  return Json::parse(R"({
    "schema_version": 1,
    "robots": 2,
    "sync": {"k_vote": 2},
    "horizon": 20,
    "fidelity": "protocol",
    "app": "noop"
  })");
}

}  // namespace

TEST_CASE("config parsing is strict") {
  CHECK_NOTHROW(parse_config(minimal_config()));

  SUBCASE("schema_version is mandatory and pinned") {
    Json j = minimal_config();
    j.erase("schema_version");
    CHECK_THROWS_AS(parse_config(j), Error);
    j = minimal_config();
    j["schema_version"] = 2;
    CHECK_THROWS_AS(parse_config(j), Error);
  }

  SUBCASE("unknown top-level fields are rejected") {
    Json j = minimal_config();
    j["robot_count"] = 3;
    CHECK_THROWS_AS(parse_config(j), Error);
  }

  SUBCASE("unknown nested fields are rejected") {
    Json j = minimal_config();
    j["sync"]["kvote"] = 3;
    CHECK_THROWS_AS(parse_config(j), Error);
  }

  SUBCASE("malformed losses are rejected") {
    Json j = minimal_config();
    j["drops"] = Json::parse(R"({"mode": "explicit", "losses": [[1, 0]]})");
    CHECK_THROWS_AS(parse_config(j), Error);
  }

  SUBCASE("pose count must match the robot count") {
    Json j = minimal_config();
    j["initial_poses"] = Json::parse("[[1, 2, 0]]");
    CHECK_THROWS_AS(parse_config(j), Error);
  }

  SUBCASE("bad sync parameters fail as ConfigInvalid") {
    Json j = minimal_config();
    j["sync"]["k_vote"] = 0;
    try {
      parse_config(j);
      FAIL("expected ConfigInvalid");
    } catch (const Error& e) {
      CHECK_EQ(e.code(), Errc::config_invalid);
    }
  }
}

TEST_CASE("run summary is exactly recomputable from the trace stream") {
  ScenarioConfig cfg = parse_config(minimal_config());
  cfg.checks.skew_max = 0;
  cfg.checks.liveness_auto = true;
  cfg.checks.streak_max = 2;
  cfg.checks.common_knowledge = true;
  const RunResult result = run_scenario(cfg);
  CHECK(result.checks_passed);
  REQUIRE_EQ(result.trace_lines.size(), 20);
  const Json recomputed = summarize_trace(result.trace_lines, cfg);
  CHECK_EQ(result.summary, recomputed);
  CHECK_EQ(result.summary.at("checks").at("all"), "pass");
  CHECK_EQ(result.summary.at("max_skew").get<int>(), 0);
}

TEST_CASE("violated checks flip the run to failing with named violations") {
  ScenarioConfig cfg = parse_config(minimal_config());
  cfg.checks.liveness_min = 1000;  // unattainable
  const RunResult result = run_scenario(cfg);
  CHECK_FALSE(result.checks_passed);
  REQUIRE_FALSE(result.violations.empty());
  CHECK(result.violations.front().find("liveness") != std::string::npos);
}

TEST_CASE("exhaustive sweep over single losses holds zero skew for k_vote 2") {
  ScenarioConfig cfg = parse_config(minimal_config());
  cfg.checks.skew_max = 0;
  cfg.checks.common_knowledge = true;
  SweepOptions opt;
  opt.exhaustive = true;
  opt.max_losses = 1;
  const SweepResult res = run_sweep(cfg, opt);
  CHECK_EQ(res.schedules_run, 1 + 20 * 2);
  CHECK(res.passed);
  CHECK_EQ(res.worst_skew, 0);
}

TEST_CASE("random sweep requires a stochastic drop mode and respects the budget") {
  ScenarioConfig cfg = parse_config(minimal_config());
  SweepOptions opt;
  opt.random_n = 5;
  CHECK_THROWS_AS(run_sweep(cfg, opt), Error);  // drops.mode is none

  cfg.drops.mode = "iid";
  cfg.drops.p = 0.1;
  const SweepResult res = run_sweep(cfg, opt);
  CHECK_EQ(res.schedules_run, 5);

  SweepOptions tight;
  tight.exhaustive = true;
  tight.max_losses = 3;
  tight.budget = 10;
  CHECK_THROWS_AS(run_sweep(cfg, tight), Error);  // BudgetExceeded
}

TEST_CASE("full-fidelity scenario reports a position rmse") {
  Json j = minimal_config();
  j["fidelity"] = "full";
  j["robots"] = 1;
  j["horizon"] = 10;
  j["noise"] = Json::parse(R"({"gyro": 0.01, "flow": 0.5, "uwb": 0.05, "accel": 0.02, "seed": 3})");
  ScenarioConfig cfg = parse_config(j);
  cfg.checks.rmse_max = 0.5;
  const RunResult result = run_scenario(cfg);
  CHECK(result.checks_passed);
  CHECK_GT(result.summary.at("position_rmse").get<double>(), 0.0);
  CHECK_LT(result.summary.at("position_rmse").get<double>(), 0.5);
}
