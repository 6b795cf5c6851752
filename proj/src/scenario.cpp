#include "syrof/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace syrof::cli {

namespace {

// ---------------------------------------------------------------------------
// strict config parsing
// ---------------------------------------------------------------------------

void require_keys(const Json& obj, const char* where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw Error(Errc::config_invalid, std::string(where) + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end())
      throw Error(Errc::config_invalid, std::string("unknown field '") + key + "' in " + where);
  }
}

template <typename T>
T get_or(const Json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const Json::exception&) {
    throw Error(Errc::config_invalid, std::string("field '") + key + "' has the wrong type");
  }
}

// ---------------------------------------------------------------------------
// trace model: built from round reports, or re-parsed from the JSON stream
// ---------------------------------------------------------------------------

struct TraceEvent {
  std::string kind;  // start | late_join | evict | clamp | stale_frame | auto | coop
  uint64_t index = 0;
  std::string mode;  // C | A (start events)
  std::string hash;  // LDMap hash hex (start events)
  int peer = -1;
};

struct TraceRobot {
  uint8_t id = 0;
  std::string st;   // P | W | V at broadcast
  std::string om;   // C | A at broadcast
  std::string ome;  // mode at end of round
  double ex = 0, ey = 0, eth = 0, evx = 0, evy = 0;
  double tx = 0, ty = 0, tth = 0;
  std::vector<TraceEvent> events;
};

struct TraceRound {
  uint64_t round = 0;
  int delivered = 0;
  int dropped = 0;
  std::vector<TraceRobot> robots;
};

const char* state_code(sync::ProtoState s) {
  switch (s) {
    case sync::ProtoState::kProgress: return "P";
    case sync::ProtoState::kWait: return "W";
    case sync::ProtoState::kVote: return "V";
  }
  return "?";
}

const char* mode_code(sync::OpMode m) { return m == sync::OpMode::kCooperative ? "C" : "A"; }

std::string hash_hex(uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

TraceRound to_trace_round(const simworld::RoundReport& rep) {
  TraceRound out;
  out.round = rep.round;
  out.delivered = rep.delivered;
  out.dropped = rep.dropped;
  out.robots.reserve(rep.robots.size());
  for (const auto& rr : rep.robots) {
    TraceRobot tr;
    tr.id = rr.id;
    tr.st = state_code(rr.state_at_broadcast);
    tr.om = mode_code(rr.mode_at_broadcast);
    tr.ome = mode_code(rr.mode_at_end);
    tr.ex = rr.est_x;
    tr.ey = rr.est_y;
    tr.eth = rr.est_theta;
    tr.evx = rr.est_vx;
    tr.evy = rr.est_vy;
    tr.tx = rr.true_x;
    tr.ty = rr.true_y;
    tr.tth = rr.true_theta;
    for (const auto& ev : rr.events) {
      TraceEvent te;
      switch (ev.kind) {
        case simworld::WorldEvent::Kind::kStartManeuver:
        case simworld::WorldEvent::Kind::kLateJoin:
          te.kind = ev.kind == simworld::WorldEvent::Kind::kLateJoin ? "late_join" : "start";
          te.index = ev.maneuver_index;
          te.mode = mode_code(ev.mode);
          te.hash = hash_hex(ev.ldmap_hash);
          break;
        case simworld::WorldEvent::Kind::kEvicted:
          te.kind = "evict";
          te.peer = ev.peer;
          break;
        case simworld::WorldEvent::Kind::kDurationClamped:
          te.kind = "clamp";
          break;
        case simworld::WorldEvent::Kind::kIgnoredEvicted:
          te.kind = "stale_frame";
          te.peer = ev.peer;
          break;
        case simworld::WorldEvent::Kind::kWentAutonomous:
          te.kind = "auto";
          break;
        case simworld::WorldEvent::Kind::kWentCooperative:
          te.kind = "coop";
          break;
      }
      tr.events.push_back(std::move(te));
    }
    out.robots.push_back(std::move(tr));
  }
  return out;
}

std::string trace_line(const TraceRound& tr) {
  Json robots = Json::array();
  for (const auto& r : tr.robots) {
    Json events = Json::array();
    for (const auto& ev : r.events) {
      Json e;
      e["k"] = ev.kind;
      if (ev.kind == "start" || ev.kind == "late_join") {
        e["i"] = ev.index;
        e["m"] = ev.mode;
        e["h"] = ev.hash;
      }
      if (ev.peer >= 0) e["p"] = ev.peer;
      events.push_back(std::move(e));
    }
    Json jr;
    jr["id"] = r.id;
    jr["st"] = r.st;
    jr["om"] = r.om;
    jr["ome"] = r.ome;
    jr["ex"] = r.ex;
    jr["ey"] = r.ey;
    jr["eth"] = r.eth;
    jr["evx"] = r.evx;
    jr["evy"] = r.evy;
    jr["tx"] = r.tx;
    jr["ty"] = r.ty;
    jr["tth"] = r.tth;
    jr["ev"] = std::move(events);
    robots.push_back(std::move(jr));
  }
  Json line;
  line["round"] = tr.round;
  line["delivered"] = tr.delivered;
  line["dropped"] = tr.dropped;
  line["robots"] = std::move(robots);
  return line.dump();
}

TraceRound parse_trace_line(const std::string& text) {
  const Json j = Json::parse(text);
  TraceRound tr;
  tr.round = j.at("round").get<uint64_t>();
  tr.delivered = j.at("delivered").get<int>();
  tr.dropped = j.at("dropped").get<int>();
  for (const auto& jr : j.at("robots")) {
    TraceRobot r;
    r.id = jr.at("id").get<uint8_t>();
    r.st = jr.at("st").get<std::string>();
    r.om = jr.at("om").get<std::string>();
    r.ome = jr.at("ome").get<std::string>();
    r.ex = jr.at("ex").get<double>();
    r.ey = jr.at("ey").get<double>();
    r.eth = jr.at("eth").get<double>();
    r.evx = jr.at("evx").get<double>();
    r.evy = jr.at("evy").get<double>();
    r.tx = jr.at("tx").get<double>();
    r.ty = jr.at("ty").get<double>();
    r.tth = jr.at("tth").get<double>();
    for (const auto& je : jr.at("ev")) {
      TraceEvent ev;
      ev.kind = je.at("k").get<std::string>();
      if (je.contains("i")) ev.index = je.at("i").get<uint64_t>();
      if (je.contains("m")) ev.mode = je.at("m").get<std::string>();
      if (je.contains("h")) ev.hash = je.at("h").get<std::string>();
      if (je.contains("p")) ev.peer = je.at("p").get<int>();
      r.events.push_back(std::move(ev));
    }
    tr.robots.push_back(std::move(r));
  }
  return tr;
}

// ---------------------------------------------------------------------------
// metric extraction
// ---------------------------------------------------------------------------

struct StartInfo {
  uint64_t round = 0;
  std::string mode;
  std::string hash;
  bool late = false;
};

Json summarize(const std::vector<TraceRound>& rounds, const ScenarioConfig& cfg) {
  const int n = cfg.robots;
  const uint64_t last_round = rounds.empty() ? 0 : rounds.back().round;

  // per maneuver index: robot -> start info
  std::map<uint64_t, std::map<int, StartInfo>> starts;
  std::vector<int> starts_per_robot(static_cast<size_t>(n), 0);
  for (const auto& tr : rounds) {
    for (const auto& r : tr.robots) {
      for (const auto& ev : r.events) {
        if (ev.kind != "start" && ev.kind != "late_join") continue;
        starts[ev.index][r.id] = {tr.round, ev.mode, ev.hash, ev.kind == "late_join"};
        ++starts_per_robot[r.id];
      }
    }
  }

  int max_skew = 0;
  bool any_complete = false;
  std::vector<std::string> skew_violations;
  const std::optional<int> bound = cfg.checks.skew_max;
  for (const auto& [index, per_robot] : starts) {
    if (per_robot.size() == static_cast<size_t>(n)) {
      uint64_t lo = UINT64_MAX, hi = 0;
      for (const auto& [robot, info] : per_robot) {
        lo = std::min(lo, info.round);
        hi = std::max(hi, info.round);
      }
      const int skew = static_cast<int>(hi - lo);
      max_skew = std::max(max_skew, skew);
      any_complete = true;
      if (bound && skew > *bound)
        skew_violations.push_back("maneuver " + std::to_string(index) + ": skew " + std::to_string(skew));
    } else if (bound) {
      // some robot never started this maneuver; a violation once the bound's
      // grace from the earliest starter has elapsed inside the horizon
      uint64_t lo = UINT64_MAX;
      for (const auto& [robot, info] : per_robot) lo = std::min(lo, info.round);
      if (last_round >= lo + static_cast<uint64_t>(*bound))
        skew_violations.push_back("maneuver " + std::to_string(index) + ": " +
                                  std::to_string(n - per_robot.size()) + " robot(s) never started it");
    }
  }

  // op-mode disagreement streaks among robots running stream consensus
  int max_streak = 0;
  int streak = 0;
  for (const auto& tr : rounds) {
    bool coop_seen = false, auto_seen = false;
    for (const auto& r : tr.robots) {
      if (r.st == "P") continue;  // forced-COOPERATIVE reporter, not participating
      (r.om == "C" ? coop_seen : auto_seen) = true;
    }
    if (coop_seen && auto_seen) {
      ++streak;
      max_streak = std::max(max_streak, streak);
    } else {
      streak = 0;
    }
  }

  // common knowledge: COOPERATIVE starters of one maneuver carry identical maps
  std::vector<std::string> ck_violations;
  for (const auto& [index, per_robot] : starts) {
    std::set<std::string> hashes;
    for (const auto& [robot, info] : per_robot)
      if (info.mode == "C") hashes.insert(info.hash);
    if (hashes.size() > 1)
      ck_violations.push_back("maneuver " + std::to_string(index) + ": " + std::to_string(hashes.size()) +
                              " distinct COOPERATIVE maps");
  }

  // round-level position RMSE of the broadcast estimate against ground truth
  double sq = 0;
  uint64_t samples = 0;
  uint64_t delivered = 0, dropped = 0;
  for (const auto& tr : rounds) {
    delivered += static_cast<uint64_t>(tr.delivered);
    dropped += static_cast<uint64_t>(tr.dropped);
    for (const auto& r : tr.robots) {
      sq += (r.ex - r.tx) * (r.ex - r.tx) + (r.ey - r.ty) * (r.ey - r.ty);
      ++samples;
    }
  }
  const double rmse = samples == 0 ? 0.0 : std::sqrt(sq / static_cast<double>(samples));

  // check verdicts
  Json checks;
  std::vector<std::string> violations;
  const auto verdict = [&](const char* name, bool enabled, bool ok, const std::string& detail) {
    checks[name] = !enabled ? "off" : ok ? "pass" : "fail";
    if (enabled && !ok) violations.push_back(std::string(name) + ": " + detail);
  };
  verdict("skew", bound.has_value(), skew_violations.empty(),
          skew_violations.empty() ? "" : skew_violations.front());
  int liveness_needed = 0;
  if (cfg.checks.liveness_auto)
    liveness_needed = static_cast<int>(cfg.horizon / (2 * cfg.sync.k_vote + 2));
  else if (cfg.checks.liveness_min)
    liveness_needed = *cfg.checks.liveness_min;
  const bool liveness_enabled = cfg.checks.liveness_auto || cfg.checks.liveness_min.has_value();
  int min_starts = starts_per_robot.empty() ? 0 : *std::min_element(starts_per_robot.begin(), starts_per_robot.end());
  verdict("liveness", liveness_enabled, min_starts >= liveness_needed,
          "min starts " + std::to_string(min_starts) + " < required " + std::to_string(liveness_needed));
  verdict("streak", cfg.checks.streak_max.has_value(), max_streak <= cfg.checks.streak_max.value_or(0),
          "max streak " + std::to_string(max_streak));
  verdict("common_knowledge", cfg.checks.common_knowledge, ck_violations.empty(),
          ck_violations.empty() ? "" : ck_violations.front());
  verdict("rmse", cfg.checks.rmse_max.has_value(), rmse <= cfg.checks.rmse_max.value_or(0.0),
          "rmse " + std::to_string(rmse));
  checks["all"] = violations.empty() ? "pass" : "fail";

  Json start_rounds = Json::object();
  for (const auto& [index, per_robot] : starts) {
    Json row = Json::object();
    for (const auto& [robot, info] : per_robot) row[std::to_string(robot)] = info.round;
    start_rounds[std::to_string(index)] = std::move(row);
  }

  Json summary;
  summary["schema_version"] = 1;
  summary["rounds"] = rounds.size();
  summary["robots"] = n;
  summary["delivered"] = delivered;
  summary["dropped"] = dropped;
  summary["starts_per_robot"] = starts_per_robot;
  summary["start_rounds"] = std::move(start_rounds);
  if (any_complete)
    summary["max_skew"] = max_skew;
  else
    summary["max_skew"] = nullptr;
  summary["skew_violations"] = skew_violations;
  summary["max_disagreement_streak"] = max_streak;
  summary["ck_violations"] = ck_violations;
  summary["position_rmse"] = rmse;
  summary["checks"] = checks;
  summary["violations"] = violations;
  return summary;
}

}  // namespace

ScenarioConfig parse_config(const Json& root) {
  require_keys(root, "scenario",
               {"schema_version", "robots", "initial_poses", "sync", "noise", "drops", "horizon", "app", "seed",
                "fidelity", "arena_size", "max_speed", "ekf_delta", "steps_per_round", "checks"});
  ScenarioConfig cfg;
  if (!root.contains("schema_version")) throw Error(Errc::config_invalid, "schema_version is required");
  cfg.schema_version = root.at("schema_version").get<int>();
  if (cfg.schema_version != 1)
    throw Error(Errc::config_invalid, "unsupported schema_version " + std::to_string(cfg.schema_version));

  cfg.robots = get_or(root, "robots", 3);
  if (cfg.robots < 1 || cfg.robots > 32) throw Error(Errc::config_invalid, "robots must be in 1..=32");
  if (root.contains("initial_poses")) {
    for (const auto& jp : root.at("initial_poses")) {
      if (!jp.is_array() || jp.size() != 3)
        throw Error(Errc::config_invalid, "initial_poses entries must be [x, y, theta]");
      cfg.initial_poses.push_back({jp[0].get<double>(), jp[1].get<double>(), jp[2].get<double>()});
    }
    if (cfg.initial_poses.size() != static_cast<size_t>(cfg.robots))
      throw Error(Errc::config_invalid, "initial_poses must list one pose per robot");
  }

  if (root.contains("sync")) {
    const Json& js = root.at("sync");
    require_keys(js, "sync", {"k_vote", "round_period", "autonomous_threshold", "member_timeout"});
    cfg.sync.k_vote = get_or(js, "k_vote", cfg.sync.k_vote);
    cfg.sync.round_period = get_or(js, "round_period", cfg.sync.round_period);
    cfg.sync.autonomous_threshold = get_or(js, "autonomous_threshold", cfg.sync.autonomous_threshold);
    cfg.sync.member_timeout = get_or(js, "member_timeout", cfg.sync.member_timeout);
  }
  try {
    cfg.sync.validate();
  } catch (const Error& e) {
    throw Error(Errc::config_invalid, e.what());
  }

  if (root.contains("noise")) {
    const Json& jn = root.at("noise");
    require_keys(jn, "noise", {"gyro", "flow", "uwb", "accel", "seed"});
    cfg.noise.gyro_sigma = get_or(jn, "gyro", 0.0);
    cfg.noise.flow_sigma = get_or(jn, "flow", 0.0);
    cfg.noise.uwb_sigma = get_or(jn, "uwb", 0.0);
    cfg.noise.accel_sigma = get_or(jn, "accel", 0.0);
    cfg.noise.seed = get_or(jn, "seed", static_cast<uint64_t>(0));
    if (cfg.noise.gyro_sigma < 0 || cfg.noise.flow_sigma < 0 || cfg.noise.uwb_sigma < 0 || cfg.noise.accel_sigma < 0)
      throw Error(Errc::config_invalid, "noise sigmas must be >= 0");
  }

  if (root.contains("drops")) {
    const Json& jd = root.at("drops");
    require_keys(jd, "drops", {"mode", "p", "burst_max", "seed", "losses"});
    cfg.drops.mode = get_or<std::string>(jd, "mode", "none");
    cfg.drops.p = get_or(jd, "p", 0.0);
    cfg.drops.burst_max = get_or(jd, "burst_max", 0);
    cfg.drops.seed = get_or(jd, "seed", static_cast<uint64_t>(0));
    if (jd.contains("losses")) {
      for (const auto& jl : jd.at("losses")) {
        if (!jl.is_array() || jl.size() != 3)
          throw Error(Errc::config_invalid, "losses entries must be [round, from, to]");
        cfg.drops.losses.push_back(
            {jl[0].get<uint64_t>(), jl[1].get<uint8_t>(), jl[2].get<uint8_t>()});
      }
    }
    if (cfg.drops.mode != "none" && cfg.drops.mode != "explicit" && cfg.drops.mode != "iid" &&
        cfg.drops.mode != "burst")
      throw Error(Errc::config_invalid, "drops.mode must be none|explicit|iid|burst");
  }

  cfg.horizon = get_or(root, "horizon", 100);
  if (cfg.horizon < 1) throw Error(Errc::config_invalid, "horizon must be >= 1");
  cfg.app = get_or<std::string>(root, "app", "noop");
  cfg.seed = get_or(root, "seed", static_cast<uint64_t>(0));
  cfg.fidelity = get_or<std::string>(root, "fidelity", "full");
  if (cfg.fidelity != "full" && cfg.fidelity != "protocol")
    throw Error(Errc::config_invalid, "fidelity must be full|protocol");
  cfg.arena_size = get_or(root, "arena_size", 10.0);
  cfg.max_speed = get_or(root, "max_speed", 0.5);
  cfg.ekf_delta = get_or(root, "ekf_delta", 0.05);
  cfg.steps_per_round = get_or(root, "steps_per_round", 20);

  if (root.contains("checks")) {
    const Json& jc = root.at("checks");
    require_keys(jc, "checks", {"skew_max", "liveness_min", "streak_max", "common_knowledge", "rmse_max"});
    if (jc.contains("skew_max")) cfg.checks.skew_max = jc.at("skew_max").get<int>();
    if (jc.contains("liveness_min")) {
      if (jc.at("liveness_min").is_string()) {
        if (jc.at("liveness_min").get<std::string>() != "auto")
          throw Error(Errc::config_invalid, "liveness_min must be an integer or \"auto\"");
        cfg.checks.liveness_auto = true;
      } else {
        cfg.checks.liveness_min = jc.at("liveness_min").get<int>();
      }
    }
    if (jc.contains("streak_max")) cfg.checks.streak_max = jc.at("streak_max").get<int>();
    cfg.checks.common_knowledge = get_or(jc, "common_knowledge", false);
    if (jc.contains("rmse_max")) cfg.checks.rmse_max = jc.at("rmse_max").get<double>();
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::config_invalid, "cannot open " + path);
  Json root;
  try {
    in >> root;
  } catch (const Json::exception& e) {
    throw Error(Errc::config_invalid, std::string("JSON parse error: ") + e.what());
  }
  return parse_config(root);
}

simworld::DropSchedule make_drops(const DropsSpec& spec) {
  if (spec.mode == "none") return simworld::DropSchedule::none();
  if (spec.mode == "explicit") return simworld::DropSchedule::explicit_losses(spec.losses);
  if (spec.mode == "iid") return simworld::DropSchedule::stochastic(spec.seed, spec.p, 0);
  if (spec.mode == "burst") return simworld::DropSchedule::stochastic(spec.seed, spec.p, spec.burst_max);
  throw Error(Errc::config_invalid, "drops.mode must be none|explicit|iid|burst");
}

simworld::WorldConfig to_world_config(const ScenarioConfig& cfg) {
  simworld::WorldConfig wc;
  wc.n_robots = cfg.robots;
  wc.initial_poses = cfg.initial_poses;
  wc.sync = cfg.sync;
  wc.noise = cfg.noise;
  wc.drops = make_drops(cfg.drops);
  wc.app = cfg.app;
  wc.fidelity = cfg.fidelity == "full" ? simworld::Fidelity::kFull : simworld::Fidelity::kProtocol;
  wc.arena_size = cfg.arena_size;
  wc.max_speed = cfg.max_speed;
  wc.ekf_delta = cfg.ekf_delta;
  wc.steps_per_round = cfg.steps_per_round;
  wc.seed = cfg.seed ^ cfg.noise.seed;
  return wc;
}

RunResult run_scenario(const ScenarioConfig& cfg, bool keep_trace) {
  simworld::World world(to_world_config(cfg));
  std::vector<TraceRound> rounds;
  rounds.reserve(static_cast<size_t>(cfg.horizon));
  RunResult result;
  for (int r = 0; r < cfg.horizon; ++r) {
    const simworld::RoundReport rep = world.run_round();
    const int expected = cfg.robots * (cfg.robots - 1);
    if (rep.delivered + rep.dropped != expected)
      throw Error(Errc::config_invalid, "loss accounting broke: delivered+dropped != n(n-1)");
    rounds.push_back(to_trace_round(rep));
  }
  if (keep_trace) {
    result.trace_lines.reserve(rounds.size());
    for (const auto& tr : rounds) result.trace_lines.push_back(trace_line(tr));
  }
  result.summary = summarize(rounds, cfg);
  result.metrics = world.metrics();
  result.starts = world.starts();
  result.checks_passed = result.summary.at("checks").at("all") == "pass";
  for (const auto& v : result.summary.at("violations")) result.violations.push_back(v.get<std::string>());

  // belt and braces for common knowledge: compare the full map bytes in
  // process, not just the 64-bit hashes that go into the trace
  if (cfg.checks.common_knowledge) {
    std::map<uint64_t, std::vector<const simworld::StartRecord*>> by_index;
    for (const auto& s : result.starts) by_index[s.maneuver_index].push_back(&s);
    for (const auto& [index, recs] : by_index) {
      const simworld::StartRecord* reference = nullptr;
      for (const simworld::StartRecord* s : recs) {
        if (s->mode != sync::OpMode::kCooperative) continue;
        if (reference == nullptr) {
          reference = s;
        } else if (s->map_bytes != reference->map_bytes) {
          result.checks_passed = false;
          result.violations.push_back("common_knowledge: maneuver " + std::to_string(index) +
                                      " maps differ byte-wise");
        }
      }
    }
  }
  return result;
}

Json summarize_trace(const std::vector<std::string>& trace_lines, const ScenarioConfig& cfg) {
  std::vector<TraceRound> rounds;
  rounds.reserve(trace_lines.size());
  for (const auto& line : trace_lines) rounds.push_back(parse_trace_line(line));
  return summarize(rounds, cfg);
}

SweepResult run_sweep(const ScenarioConfig& cfg, const SweepOptions& opt) {
  SweepResult res;
  res.worst_skew = -1;
  res.worst_streak = 0;

  auto run_one = [&](const DropsSpec& drops, const Json& described) {
    ScenarioConfig c = cfg;
    c.drops = drops;
    const RunResult r = run_scenario(c, /*keep_trace=*/false);
    if (!r.summary.at("max_skew").is_null())
      res.worst_skew = std::max(res.worst_skew, r.summary.at("max_skew").get<int>());
    res.worst_streak = std::max(res.worst_streak, r.summary.at("max_disagreement_streak").get<int>());
    if (!r.checks_passed && res.passed) {
      res.passed = false;
      Json bad = described;
      bad["violations"] = r.violations;
      res.violating_schedule = bad;
    }
    ++res.schedules_run;
  };

  if (opt.exhaustive) {
    simworld::ScheduleEnumerator en(cfg.robots, cfg.horizon, opt.max_losses, opt.budget);
    while (auto losses = en.next()) {
      DropsSpec spec;
      spec.mode = "explicit";
      spec.losses = *losses;
      Json described;
      described["mode"] = "explicit";
      Json jl = Json::array();
      for (const auto& l : *losses) jl.push_back({l.round, l.from, l.to});
      described["losses"] = jl;
      run_one(spec, described);
    }
  } else {
    if (cfg.drops.mode != "iid" && cfg.drops.mode != "burst")
      throw Error(Errc::config_invalid, "random sweep needs drops.mode iid or burst");
    for (int i = 0; i < opt.random_n; ++i) {
      DropsSpec spec = cfg.drops;
      spec.seed = opt.seed + static_cast<uint64_t>(i);
      Json described;
      described["mode"] = spec.mode;
      described["p"] = spec.p;
      described["burst_max"] = spec.burst_max;
      described["seed"] = spec.seed;
      run_one(spec, described);
    }
  }

  res.report["schedules_run"] = res.schedules_run;
  res.report["worst_skew"] = res.worst_skew;
  res.report["worst_disagreement_streak"] = res.worst_streak;
  res.report["passed"] = res.passed;
  if (res.violating_schedule) res.report["violating_schedule"] = *res.violating_schedule;
  return res;
}

}  // namespace syrof::cli
