#include <doctest.h>

#include <vector>

#include "syrof/simworld.hpp"
#include "syrof/vm.hpp"

using namespace syrof;
using namespace syrof::vm;
using simworld::Fidelity;
using simworld::World;
using simworld::WorldConfig;

namespace {

WorldConfig protocol_world(int n, int k_vote, const std::string& app = "noop") {
  WorldConfig cfg;
  cfg.n_robots = n;
  cfg.sync.k_vote = k_vote;
  cfg.app = app;
  cfg.fidelity = Fidelity::kProtocol;
  return cfg;
}

}  // namespace

TEST_CASE("register then run one round: init once, new_round once") {
  WorldConfig cfg = protocol_world(1, 2, "");
  World world(cfg);
  int inits = 0, new_rounds = 0, end_rounds = 0;
  AppHooks hooks;
  hooks.init = [&] { ++inits; };
  hooks.new_round = [&](ManeuverCommand& cmd, const Ldmap&, uint8_t&, uint32_t) -> uint8_t {
    ++new_rounds;
    cmd.duration_rounds = 2;
    return 0;
  };
  hooks.end_of_round = [&](const Ldmap&, uint8_t&, uint32_t) -> uint8_t {
    ++end_rounds;
    return 0;
  };
  world.set_app(0, hooks);
  world.run_round();
  CHECK_EQ(inits, 1);
  CHECK_EQ(new_rounds, 1);
  CHECK_EQ(end_rounds, 0);
}

TEST_CASE("double app registration fails") {
  RobotVm vm(0, 2, 1.0);
  vm.register_app(AppHooks{});
  CHECK_THROWS_AS(vm.register_app(AppHooks{}), Error);
}

TEST_CASE("a robot without an app idles through no-op maneuvers and stays live") {
  World world(protocol_world(1, 2, ""));
  for (int r = 0; r < 20; ++r) world.run_round();
  CHECK_GE(world.starts().size(), 3);  // floor(20 / (2 + 2 + 2))
  CHECK_EQ(world.plant(0).vx, 0.0);
}

TEST_CASE("send_message_data pads, replaces, and bounds the payload") {
  RobotVm vm(0, 2, 1.0);
  const std::vector<uint8_t> four{1, 2, 3, 4};
  vm.send_message_data(four);
  CHECK_EQ(vm.payload(), std::array<uint8_t, 9>{1, 2, 3, 4, 0, 0, 0, 0, 0});
  const std::vector<uint8_t> nine{9, 8, 7, 6, 5, 4, 3, 2, 1};
  vm.send_message_data(nine);
  CHECK_EQ(vm.payload(), std::array<uint8_t, 9>{9, 8, 7, 6, 5, 4, 3, 2, 1});
  const std::vector<uint8_t> ten(10, 1);
  CHECK_THROWS_AS(vm.send_message_data(ten), Error);
}

TEST_CASE("payload set in a round reaches every peer's map within the next round") {
  WorldConfig cfg = protocol_world(2, 2, "");
  World world(cfg);
  for (int robot = 0; robot < 2; ++robot) {
    AppHooks hooks;
    hooks.new_round = [robot, &world](ManeuverCommand& cmd, const Ldmap&, uint8_t&, uint32_t) -> uint8_t {
      cmd.duration_rounds = 2;
      // advertise the sender id + a marker through the payload channel
      const std::array<uint8_t, 2> data{static_cast<uint8_t>(robot), 0xAB};
      world.robot_vm_mut(robot).send_message_data(data);
      return 0;
    };
    world.set_app(robot, hooks);
  }
  world.run_round();  // lossless: payloads cross in round 0
  const Ldmap& map1 = world.last_snapshot(1);
  const LdmapEntry* entry = map1.find(0);
  REQUIRE(entry != nullptr);
  CHECK_EQ(entry->payload[0], 0);
  CHECK_EQ(entry->payload[1], 0xAB);
}

TEST_CASE("durations below k_vote are clamped with a warning event") {
  WorldConfig cfg = protocol_world(1, 3, "");
  World world(cfg);
  AppHooks hooks;
  hooks.new_round = [](ManeuverCommand& cmd, const Ldmap&, uint8_t&, uint32_t) -> uint8_t {
    cmd.duration_rounds = 1;  // below k_vote = 3
    return 0;
  };
  world.set_app(0, hooks);
  const auto rep = world.run_round();
  bool clamped = false;
  for (const auto& ev : rep.robots[0].events)
    if (ev.kind == simworld::WorldEvent::Kind::kDurationClamped) clamped = true;
  CHECK(clamped);
  // the maneuver really spans three rounds: still in PROGRESS after round 1
  world.run_round();
  CHECK_EQ(world.synchronizer(0).proto_state(), sync::ProtoState::kProgress);
}

TEST_CASE("hook failures surface with robot and round") {
  WorldConfig cfg = protocol_world(1, 2, "");
  World world(cfg);
  AppHooks hooks;
  hooks.new_round = [](ManeuverCommand&, const Ldmap&, uint8_t&, uint32_t) -> uint8_t { return 7; };
  world.set_app(0, hooks);
  try {
    world.run_round();
    FAIL("expected HookFailure");
  } catch (const Error& e) {
    CHECK_EQ(e.code(), Errc::hook_failure);
    CHECK(std::string(e.what()).find("robot 0") != std::string::npos);
  }
}

TEST_CASE("callback cardinality: one init, new_round leads end_of_round by at most one") {
  WorldConfig cfg = protocol_world(2, 2, "");
  World world(cfg);
  struct Counters {
    int init = 0, new_round = 0, end_round = 0;
  };
  std::vector<Counters> counters(2);
  for (int robot = 0; robot < 2; ++robot) {
    AppHooks hooks;
    hooks.init = [&counters, robot] { ++counters[robot].init; };
    hooks.new_round = [&counters, robot](ManeuverCommand& cmd, const Ldmap&, uint8_t&, uint32_t) -> uint8_t {
      cmd.duration_rounds = 2;
      ++counters[robot].new_round;
      return 0;
    };
    hooks.end_of_round = [&counters, robot](const Ldmap&, uint8_t&, uint32_t) -> uint8_t {
      ++counters[robot].end_round;
      return 0;
    };
    world.set_app(robot, hooks);
  }
  for (int r = 0; r < 37; ++r) world.run_round();
  for (const auto& c : counters) {
    CHECK_EQ(c.init, 1);
    CHECK_GE(c.new_round, 2);
    const bool balanced = c.new_round == c.end_round || c.new_round == c.end_round + 1;
    CHECK(balanced);
  }
}

TEST_CASE("global state persists across hooks") {
  WorldConfig cfg = protocol_world(1, 2, "");
  World world(cfg);
  AppHooks hooks;
  hooks.new_round = [](ManeuverCommand& cmd, const Ldmap&, uint8_t& global, uint32_t) -> uint8_t {
    cmd.duration_rounds = 2;
    ++global;
    return 0;
  };
  world.set_app(0, hooks);
  for (int r = 0; r < 13; ++r) world.run_round();
  CHECK_EQ(world.robot_vm(0).global_state(), world.robot_vm(0).new_round_count());
  CHECK_GE(world.robot_vm(0).global_state(), 2);
}

TEST_CASE("cooperative starters hand byte-identical maps to new_round") {
  WorldConfig cfg = protocol_world(3, 2, "gather-at-centroid");
  cfg.initial_poses = {{2, 2, 0}, {8, 2, 0}, {5, 8, 0}};
  World world(cfg);
  for (int r = 0; r < 30; ++r) world.run_round();
  REQUIRE_GE(world.starts().size(), 6);
  std::map<uint64_t, std::vector<const simworld::StartRecord*>> by_index;
  for (const auto& s : world.starts()) by_index[s.maneuver_index].push_back(&s);
  int compared = 0;
  for (const auto& [index, recs] : by_index) {
    for (size_t i = 1; i < recs.size(); ++i) {
      if (recs[i]->mode != sync::OpMode::kCooperative || recs[0]->mode != sync::OpMode::kCooperative) continue;
      CHECK_EQ(recs[i]->map_bytes, recs[0]->map_bytes);
      ++compared;
    }
  }
  CHECK_GE(compared, 4);
  // gathering actually moved the robots toward each other
  const auto& p0 = world.plant(0);
  const auto& p1 = world.plant(1);
  CHECK_LT(std::hypot(p0.x - p1.x, p0.y - p1.y), std::hypot(2.0 - 8.0, 2.0 - 2.0));
}

TEST_CASE("clock passed to hooks is rounds times the period in milliseconds") {
  WorldConfig cfg = protocol_world(1, 2, "");
  cfg.sync.round_period = 0.5;
  World world(cfg);
  std::vector<uint32_t> clocks;
  AppHooks hooks;
  hooks.new_round = [&](ManeuverCommand& cmd, const Ldmap&, uint8_t&, uint32_t clock) -> uint8_t {
    cmd.duration_rounds = 2;
    clocks.push_back(clock);
    return 0;
  };
  world.set_app(0, hooks);
  for (int r = 0; r < 14; ++r) world.run_round();
  REQUIRE_GE(clocks.size(), 2);
  CHECK_EQ(clocks[0], 0);
  CHECK_EQ(clocks[1] % 500, 0);
  CHECK_GT(clocks[1], 0);
}
