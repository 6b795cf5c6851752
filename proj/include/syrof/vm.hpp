#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "syrof/errors.hpp"
#include "syrof/ldmap.hpp"

namespace syrof::vm {

/// One maneuver: a target velocity held for a number of rounds. Durations
/// shorter than k_vote are clamped (maneuvers must span at least the vote).
struct ManeuverCommand {
  double vx = 0, vy = 0;  // m/s
  double yaw_rate = 0;    // rad/s
  int duration_rounds = 1;
};

/// Application lifecycle callbacks. Status 0 means success; anything else is
/// propagated as HookFailure. Hooks must not retain references into the map.
struct AppHooks {
  std::function<void()> init;
  /// Called when a maneuver starts; must fill the command before returning.
  std::function<uint8_t(ManeuverCommand&, const Ldmap&, uint8_t&, uint32_t)> new_round;
  /// Called when the maneuver completes.
  std::function<uint8_t(const Ldmap&, uint8_t&, uint32_t)> end_of_round;
};

struct VmEvent {
  enum class Kind : uint8_t { kDurationClamped } kind = Kind::kDurationClamped;
  int requested = 0;
  int applied = 0;
};

/// Per-robot application host: stores the 9-byte payload channel, the opaque
/// globalState byte, and drives the hooks at maneuver boundaries. A robot
/// without an app idles through no-op maneuvers of k_vote rounds.
class RobotVm {
 public:
  RobotVm(uint8_t robot_id, int k_vote, double round_period)
      : robot_id_(robot_id), k_vote_(k_vote), round_period_(round_period) {}

  /// At most one app per robot; second registration throws AlreadyRegistered.
  void register_app(AppHooks hooks);
  bool has_app() const { return registered_; }

  /// Payload of up to 9 bytes, zero-padded, carried on every broadcast until replaced.
  void send_message_data(std::span<const uint8_t> payload);
  const std::array<uint8_t, sync::kPayloadSize>& payload() const { return payload_; }

  /// Maneuver start: runs init (once, lazily) and new_round, clamps the duration.
  std::vector<VmEvent> start_maneuver(const Ldmap& map, uint64_t round);
  bool maneuver_active() const { return remaining_rounds_ > 0; }
  const ManeuverCommand& command() const { return command_; }
  /// Consume one round of the active maneuver; true exactly when it completes.
  bool tick();
  /// Maneuver completion: runs the end_of_round hook.
  void complete_maneuver(const Ldmap& map, uint64_t round);

  int init_count() const { return init_count_; }
  int new_round_count() const { return new_round_count_; }
  int end_of_round_count() const { return end_of_round_count_; }
  uint8_t global_state() const { return global_state_; }

 private:
  uint32_t clock_ms(uint64_t round) const {
    return static_cast<uint32_t>(static_cast<double>(round) * round_period_ * 1000.0);
  }

  uint8_t robot_id_;
  int k_vote_;
  double round_period_;
  AppHooks hooks_;
  bool registered_ = false;
  bool init_done_ = false;
  std::array<uint8_t, sync::kPayloadSize> payload_{};
  uint8_t global_state_ = 0;
  ManeuverCommand command_{};
  int remaining_rounds_ = 0;
  int init_count_ = 0;
  int new_round_count_ = 0;
  int end_of_round_count_ = 0;
};

struct BuiltinAppConfig {
  int k_vote = 3;
  double round_period = 1.0;
  double arena_size = 10.0;
  double max_speed = 0.5;  // m/s
};

/// Built-in demo applications: "noop", "gather-at-centroid", "match-and-go".
/// The vm pointer gives apps the payload channel. Throws ConfigInvalid on an
/// unknown name.
AppHooks make_builtin_app(const std::string& name, uint8_t self_id, RobotVm* vm, const BuiltinAppConfig& cfg);

}  // namespace syrof::vm
