#include "syrof/vm.hpp"

#include <algorithm>
#include <cmath>

#include "syrof/geom.hpp"

namespace syrof::vm {

void RobotVm::register_app(AppHooks hooks) {
  if (registered_) throw Error(Errc::already_registered, "robot " + std::to_string(robot_id_) + " has an app");
  hooks_ = std::move(hooks);
  registered_ = true;
}

void RobotVm::send_message_data(std::span<const uint8_t> payload) {
  if (payload.size() > sync::kPayloadSize)
    throw Error(Errc::payload_too_large, std::to_string(payload.size()) + " bytes, limit is 9");
  payload_.fill(0);
  std::copy(payload.begin(), payload.end(), payload_.begin());
}

std::vector<VmEvent> RobotVm::start_maneuver(const Ldmap& map, uint64_t round) {
  std::vector<VmEvent> events;
  if (registered_ && !init_done_) {
    if (hooks_.init) hooks_.init();
    init_done_ = true;
    ++init_count_;
  }
  ManeuverCommand cmd;
  cmd.duration_rounds = k_vote_;
  if (registered_ && hooks_.new_round) {
    const uint8_t status = hooks_.new_round(cmd, map, global_state_, clock_ms(round));
    ++new_round_count_;
    if (status != 0)
      throw Error(Errc::hook_failure, "robot " + std::to_string(robot_id_) + " new_round status " +
                                          std::to_string(status) + " at round " + std::to_string(round));
  }
  if (cmd.duration_rounds < k_vote_) {
    events.push_back({VmEvent::Kind::kDurationClamped, cmd.duration_rounds, k_vote_});
    cmd.duration_rounds = k_vote_;
  }
  command_ = cmd;
  remaining_rounds_ = cmd.duration_rounds;
  return events;
}

bool RobotVm::tick() {
  if (remaining_rounds_ <= 0) return false;
  --remaining_rounds_;
  return remaining_rounds_ == 0;
}

void RobotVm::complete_maneuver(const Ldmap& map, uint64_t round) {
  if (registered_ && hooks_.end_of_round) {
    const uint8_t status = hooks_.end_of_round(map, global_state_, clock_ms(round));
    ++end_of_round_count_;
    if (status != 0)
      throw Error(Errc::hook_failure, "robot " + std::to_string(robot_id_) + " end_of_round status " +
                                          std::to_string(status) + " at round " + std::to_string(round));
  }
}

namespace {

AppHooks make_noop_app(const BuiltinAppConfig& cfg) {
  AppHooks hooks;
  hooks.init = [] {};
  hooks.new_round = [cfg](ManeuverCommand& cmd, const Ldmap&, uint8_t&, uint32_t) -> uint8_t {
    cmd = {};
    cmd.duration_rounds = cfg.k_vote;
    return 0;
  };
  hooks.end_of_round = [](const Ldmap&, uint8_t&, uint32_t) -> uint8_t { return 0; };
  return hooks;
}

AppHooks make_gather_app(uint8_t self_id, const BuiltinAppConfig& cfg) {
  AppHooks hooks;
  hooks.init = [] {};
  hooks.new_round = [self_id, cfg](ManeuverCommand& cmd, const Ldmap& map, uint8_t&, uint32_t) -> uint8_t {
    cmd = {};
    cmd.duration_rounds = cfg.k_vote;
    const LdmapEntry* self = map.find(self_id);
    if (self == nullptr || map.entries.empty()) return 0;  // hover if we know nothing
    double cx = 0, cy = 0;
    for (const auto& e : map.entries) {
      cx += e.x;
      cy += e.y;
    }
    cx /= static_cast<double>(map.entries.size());
    cy /= static_cast<double>(map.entries.size());
    const double horizon_s = static_cast<double>(cfg.k_vote) * cfg.round_period;
    double vx = (cx - self->x) / horizon_s;
    double vy = (cy - self->y) / horizon_s;
    const double speed = std::hypot(vx, vy);
    if (speed > cfg.max_speed) {
      vx *= cfg.max_speed / speed;
      vy *= cfg.max_speed / speed;
    }
    cmd.vx = vx;
    cmd.vy = vy;
    return 0;
  };
  hooks.end_of_round = [](const Ldmap&, uint8_t&, uint32_t) -> uint8_t { return 0; };
  return hooks;
}

AppHooks make_match_and_go_app(uint8_t self_id, RobotVm* vm, const BuiltinAppConfig& cfg) {
  AppHooks hooks;
  hooks.init = [] {};
  hooks.new_round = [self_id, vm, cfg](ManeuverCommand& cmd, const Ldmap& map, uint8_t& global_state,
                                       uint32_t) -> uint8_t {
    cmd = {};
    cmd.duration_rounds = cfg.k_vote;
    const LdmapEntry* self = map.find(self_id);
    if (self == nullptr || map.entries.empty()) return 0;
    // Shared target pattern: a ring around the arena center. Everyone computes
    // the same matching from the same map, so assignments agree.
    const size_t n = map.entries.size();
    geom::PointSet targets;
    const double c = cfg.arena_size / 2.0;
    const double r = cfg.arena_size / 4.0;
    for (size_t i = 0; i < n; ++i) {
      const double ang = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n);
      targets.points.push_back({static_cast<uint8_t>(i), c + r * std::cos(ang), c + r * std::sin(ang)});
    }
    const geom::Matching match = geom::min_weighted_matching(geom::points_from_ldmap(map), targets);
    double tx = self->x, ty = self->y;
    for (const auto& [robot, target] : match.pairs) {
      if (robot != self_id) continue;
      tx = targets.points[target].x;
      ty = targets.points[target].y;
    }
    const double dist = std::hypot(tx - self->x, ty - self->y);
    const int rounds = std::max(cfg.k_vote, static_cast<int>(std::ceil(
                                                dist / (cfg.max_speed * cfg.round_period) + 1e-9)));
    cmd.duration_rounds = rounds;
    const double horizon_s = static_cast<double>(rounds) * cfg.round_period;
    cmd.vx = (tx - self->x) / horizon_s;
    cmd.vy = (ty - self->y) / horizon_s;
    // advertise progress through the payload channel
    if (vm != nullptr) {
      std::array<uint8_t, 2> note{self_id, global_state};
      vm->send_message_data(note);
    }
    ++global_state;
    return 0;
  };
  hooks.end_of_round = [](const Ldmap&, uint8_t&, uint32_t) -> uint8_t { return 0; };
  return hooks;
}

}  // namespace

AppHooks make_builtin_app(const std::string& name, uint8_t self_id, RobotVm* vm, const BuiltinAppConfig& cfg) {
  if (name == "noop") return make_noop_app(cfg);
  if (name == "gather-at-centroid") return make_gather_app(self_id, cfg);
  if (name == "match-and-go") return make_match_and_go_app(self_id, vm, cfg);
  throw Error(Errc::config_invalid, "unknown app '" + name + "'");
}

}  // namespace syrof::vm
