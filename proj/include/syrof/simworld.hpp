#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "syrof/ekf.hpp"
#include "syrof/ldmap.hpp"
#include "syrof/pubsub.hpp"
#include "syrof/rng.hpp"
#include "syrof/sensors.hpp"
#include "syrof/sync.hpp"
#include "syrof/vm.hpp"

namespace syrof::simworld {

struct Pose {
  double x = 0, y = 0, theta = 0;
};

struct PlantState {
  double x = 0, y = 0, theta = 0;
  double vx = 0, vy = 0;
};

/// First-order tracking of the commanded velocity (instantaneous when
/// lag_tau == 0), semi-implicit position update, yaw integrated directly.
PlantState step_plant(const PlantState& p, const vm::ManeuverCommand& cmd, double dt, double lag_tau = 0.0);

/// Raw readings a robot's sensor tasks would publish for one sample instant.
struct RawSensorSample {
  sensors::ImuRaw imu;
  sensors::FlowRaw flow;
  sensors::UwbRanges uwb;
};

struct NoiseSpec {
  double gyro_sigma = 0;   // rad/s
  double flow_sigma = 0;   // px/s
  double uwb_sigma = 0;    // m
  double accel_sigma = 0;  // m/s^1.5 actuation random walk
  uint64_t seed = 0;
};

struct Loss {
  uint64_t round = 0;
  uint8_t from = 0, to = 0;
  auto operator<=>(const Loss&) const = default;
};

/// Inverse of the sensors-module conversions, plus Gaussian noise: with all
/// sigmas zero the emitted readings invert exactly to the plant state.
RawSensorSample sample_sensors(const PlantState& p, const NoiseSpec& noise, const sensors::AnchorLayout& anchors,
                               double flow_height, double flow_alpha, double true_yaw_rate, Rng& rng);

/// Measurement/process noise sized from the simulated sensor noise.
ekf::EkfConfig tuned_ekf_config(const NoiseSpec& noise, double delta, double flow_height, double flow_alpha);

/// Which (round, sender, receiver) deliveries fail. Explicit sets replay
/// verbatim; stochastic mode drives independent per-link streams (i.i.d. or
/// bursty) off one seed, so a seed fully determines the loss pattern.
class DropSchedule {
 public:
  static DropSchedule none() { return DropSchedule{}; }
  static DropSchedule explicit_losses(std::vector<Loss> losses);
  /// burst_max == 0 gives i.i.d. losses at rate p; otherwise each link enters
  /// bursts of length 1..=burst_max with start probability scaled so the
  /// marginal loss rate stays near p.
  static DropSchedule stochastic(uint64_t seed, double p, int burst_max = 0);

  /// Query links once per (round, link) in the round loop's fixed order.
  bool drops(uint64_t round, uint8_t from, uint8_t to);

  bool is_explicit() const { return mode_ == Mode::kExplicit; }
  const std::vector<Loss>& losses() const { return losses_; }

 private:
  enum class Mode { kNone, kExplicit, kStochastic } mode_ = Mode::kNone;
  std::vector<Loss> losses_;  // sorted
  uint64_t seed_ = 0;
  double p_ = 0;
  int burst_max_ = 0;
  double start_p_ = 0;
  struct LinkState {
    Rng rng{0};
    int burst_left = 0;
  };
  std::map<std::pair<uint8_t, uint8_t>, LinkState> links_;
};

/// Deterministic stream of explicit drop schedules: every loss set of size
/// 0..=max_losses over the (round x ordered-pair) grid, sizes ascending,
/// combinations in lexicographic cell order. Throws BudgetExceeded up front
/// when the count would pass the budget.
class ScheduleEnumerator {
 public:
  ScheduleEnumerator(int n_robots, int horizon, int max_losses, uint64_t budget = 20'000'000);

  uint64_t total() const { return total_; }
  std::optional<std::vector<Loss>> next();

 private:
  std::vector<Loss> cell_to_loss(const std::vector<int>& cells) const;
  bool advance_combo();

  int n_ = 0, horizon_ = 0, max_losses_ = 0;
  int n_cells_ = 0;
  uint64_t total_ = 0;
  int current_k_ = 0;
  std::vector<int> combo_;
  bool started_ = false;
  bool done_ = false;
};

enum class Fidelity {
  kFull,      // plant + noisy sensors + per-robot pub-sub pipeline + EKF
  kProtocol,  // plant + synchronizer only; beacons carry ground truth
};

struct WorldConfig {
  int n_robots = 3;
  std::vector<Pose> initial_poses;  // defaulted to a ring when empty
  sync::SyncConfig sync;
  NoiseSpec noise;
  DropSchedule drops = DropSchedule::none();
  std::string app = "noop";  // builtin name; "" = no app (idle no-op maneuvers)
  Fidelity fidelity = Fidelity::kFull;
  double arena_size = 10.0;
  double max_speed = 0.5;
  double ekf_delta = 0.05;
  int steps_per_round = 20;
  double plant_lag_tau = 0.25;
  double flow_height = 1.0;
  double flow_alpha = 0.0;
  int uwb_every_steps = 4;
  uint8_t state_topic_id = 1;  // posterior state publication topic
  ekf::DynamicsMode ekf_mode = ekf::DynamicsMode::kCorrectedKinematics;
  uint64_t seed = 0;
};

struct WorldEvent {
  enum class Kind : uint8_t {
    kStartManeuver,
    kLateJoin,
    kEvicted,
    kDurationClamped,
    kIgnoredEvicted,
    kWentAutonomous,
    kWentCooperative,
  };
  Kind kind = Kind::kStartManeuver;
  uint64_t maneuver_index = 0;  // kStartManeuver
  sync::OpMode mode = sync::OpMode::kCooperative;
  uint64_t ldmap_hash = 0;  // kStartManeuver
  uint8_t peer = 0;         // kEvicted / kIgnoredEvicted
};

struct RobotRoundRecord {
  uint8_t id = 0;
  sync::ProtoState state_at_broadcast = sync::ProtoState::kProgress;
  sync::OpMode mode_at_broadcast = sync::OpMode::kCooperative;
  sync::OpMode mode_at_end = sync::OpMode::kCooperative;
  double est_x = 0, est_y = 0, est_theta = 0, est_vx = 0, est_vy = 0;
  double true_x = 0, true_y = 0, true_theta = 0;
  std::vector<WorldEvent> events;
};

struct RoundReport {
  uint64_t round = 0;
  int delivered = 0;
  int dropped = 0;
  std::vector<RobotRoundRecord> robots;
};

/// One StartManeuver occurrence, kept for the theorem-level checks.
struct StartRecord {
  uint8_t robot = 0;
  uint64_t maneuver_index = 0;
  uint64_t round = 0;
  sync::OpMode mode = sync::OpMode::kCooperative;
  bool late_join = false;
  uint64_t map_hash = 0;
  std::vector<uint8_t> map_bytes;  // canonical LDMap handed to new_round
};

struct FilterMetrics {
  double filter_sq_err = 0;
  double deadreck_sq_err = 0;
  uint64_t steps = 0;
  double norm_innov_sq[5] = {0, 0, 0, 0, 0};
  uint64_t norm_innov_count[5] = {0, 0, 0, 0, 0};

  double filter_rmse() const { return steps == 0 ? 0.0 : std::sqrt(filter_sq_err / static_cast<double>(steps)); }
  double deadreck_rmse() const {
    return steps == 0 ? 0.0 : std::sqrt(deadreck_sq_err / static_cast<double>(steps));
  }
};

/// Deterministic round-based world: broadcast, lossy delivery, maneuver
/// bookkeeping, end-of-round protocol work, then plant/sensor/filter steps.
class World {
 public:
  explicit World(WorldConfig config);
  ~World();
  World(World&&) noexcept;
  World& operator=(World&&) noexcept;

  RoundReport run_round();

  uint64_t round() const { return round_; }
  int n_robots() const;
  const std::vector<StartRecord>& starts() const { return starts_; }
  const FilterMetrics& metrics() const { return metrics_; }
  const sync::Synchronizer& synchronizer(int robot) const;
  const PlantState& plant(int robot) const;
  const ekf::Ekf* filter(int robot) const;
  const vm::RobotVm& robot_vm(int robot) const;
  vm::RobotVm& robot_vm_mut(int robot);
  const vm::Ldmap& last_snapshot(int robot) const;
  /// Latest posterior published on the state topic (full fidelity).
  const pubsub::ByteQueue* state_mailbox(int robot) const;
  /// Replace the app of one robot (tests); must be called before the first round.
  void set_app(int robot, vm::AppHooks hooks);

 private:
  struct Robot;
  void physics_round(Robot& r, const vm::ManeuverCommand& cmd);

  WorldConfig config_;
  sensors::AnchorLayout anchors_;
  std::vector<std::unique_ptr<Robot>> robots_;
  std::vector<StartRecord> starts_;
  FilterMetrics metrics_;
  uint64_t round_ = 0;
};

}  // namespace syrof::simworld
