#include "syrof/simworld.hpp"

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstring>
#include <initializer_list>

namespace syrof::simworld {

namespace {

double wrap_angle(double a) { return ekf::wrap_angle(a); }

uint64_t link_salt(uint8_t from, uint8_t to) {
  return static_cast<uint64_t>(from) * IdSet::kMaxIds + to + 1;
}

void pack_doubles(std::vector<uint8_t>& out, std::initializer_list<double> values) {
  out.clear();
  for (double v : values) {
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>((bits >> (8 * i)) & 0xff));
  }
}

double unpack_double(const std::vector<uint8_t>& bytes, size_t index) {
  uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(bytes[index * 8 + i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

constexpr uint8_t kTopicImu = 10;
constexpr uint8_t kTopicFlow = 11;
constexpr uint8_t kTopicUwb = 12;

uint64_t binomial_capped(int n, int k, uint64_t cap) {
  if (k < 0 || k > n) return 0;
  __uint128_t result = 1;
  for (int i = 1; i <= k; ++i) {
    result = result * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    if (result > cap) return cap + 1;
  }
  return static_cast<uint64_t>(result);
}

}  // namespace

PlantState step_plant(const PlantState& p, const vm::ManeuverCommand& cmd, double dt, double lag_tau) {
  if (!(dt > 0.0)) throw Error(Errc::config_invalid, "step_plant: dt must be > 0");
  PlantState out = p;
  if (lag_tau <= 0.0) {
    out.vx = cmd.vx;
    out.vy = cmd.vy;
  } else {
    const double alpha = std::min(1.0, dt / lag_tau);
    out.vx += alpha * (cmd.vx - p.vx);
    out.vy += alpha * (cmd.vy - p.vy);
  }
  out.x += dt * out.vx;
  out.y += dt * out.vy;
  out.theta = wrap_angle(out.theta + dt * cmd.yaw_rate);
  return out;
}

RawSensorSample sample_sensors(const PlantState& p, const NoiseSpec& noise, const sensors::AnchorLayout& anchors,
                               double flow_height, double flow_alpha, double true_yaw_rate, Rng& rng) {
  RawSensorSample s;
  const double gyro_z = true_yaw_rate + noise.gyro_sigma * (noise.gyro_sigma > 0 ? rng.normal() : 0.0);
  s.imu.gyro_dps = {0.0, 0.0, gyro_z * 180.0 / M_PI};
  s.imu.accel_unit = {0.0, 0.0, 1.0};

  const double mpp = sensors::flow_meters_per_pixel(flow_height, flow_alpha, sensors::kDefaultFovTheta);
  s.flow.height_m = flow_height;
  s.flow.mount_angle_alpha = flow_alpha;
  s.flow.delta_px_x = p.vx / mpp + noise.flow_sigma * (noise.flow_sigma > 0 ? rng.normal() : 0.0);
  s.flow.delta_px_y = p.vy / mpp + noise.flow_sigma * (noise.flow_sigma > 0 ? rng.normal() : 0.0);

  for (int i = 0; i < 4; ++i) {
    const auto& a = anchors.positions[i];
    const double dx = p.x - a.x * anchors.scale;
    const double dy = p.y - a.y * anchors.scale;
    const double dz = 0.0 - a.z * anchors.scale;
    double d = std::sqrt(dx * dx + dy * dy + dz * dz);
    d += noise.uwb_sigma * (noise.uwb_sigma > 0 ? rng.normal() : 0.0);
    s.uwb.d[i] = std::max(0.0, d);
  }
  return s;
}

DropSchedule DropSchedule::explicit_losses(std::vector<Loss> losses) {
  DropSchedule d;
  d.mode_ = Mode::kExplicit;
  std::sort(losses.begin(), losses.end());
  losses.erase(std::unique(losses.begin(), losses.end()), losses.end());
  d.losses_ = std::move(losses);
  return d;
}

DropSchedule DropSchedule::stochastic(uint64_t seed, double p, int burst_max) {
  if (!(p >= 0.0 && p < 1.0)) throw Error(Errc::config_invalid, "loss probability must be in [0, 1)");
  if (burst_max < 0) throw Error(Errc::config_invalid, "burst_max must be >= 0");
  DropSchedule d;
  d.mode_ = Mode::kStochastic;
  d.seed_ = seed;
  d.p_ = p;
  d.burst_max_ = burst_max;
  // keep the marginal per-round loss rate near p when bursts stretch losses
  const double mean_burst = burst_max > 0 ? (1.0 + burst_max) / 2.0 : 1.0;
  d.start_p_ = p / mean_burst;
  return d;
}

bool DropSchedule::drops(uint64_t round, uint8_t from, uint8_t to) {
  switch (mode_) {
    case Mode::kNone:
      return false;
    case Mode::kExplicit:
      return std::binary_search(losses_.begin(), losses_.end(), Loss{round, from, to});
    case Mode::kStochastic: {
      auto [it, inserted] = links_.try_emplace(std::pair{from, to});
      LinkState& link = it->second;
      if (inserted) link.rng = Rng(seed_ ^ (0x9e3779b97f4a7c15ull * link_salt(from, to)));
      if (link.burst_left > 0) {
        --link.burst_left;
        return true;
      }
      if (link.rng.uniform01() < start_p_) {
        const int len =
            burst_max_ > 0 ? 1 + static_cast<int>(link.rng.uniform_u32(static_cast<uint32_t>(burst_max_))) : 1;
        link.burst_left = len - 1;
        return true;
      }
      return false;
    }
  }
  return false;
}

ScheduleEnumerator::ScheduleEnumerator(int n_robots, int horizon, int max_losses, uint64_t budget)
    : n_(n_robots), horizon_(horizon), max_losses_(max_losses) {
  if (n_robots < 1 || horizon < 1 || max_losses < 0)
    throw Error(Errc::config_invalid, "enumerator arguments out of range");
  n_cells_ = horizon * n_robots * (n_robots - 1);
  uint64_t total = 0;
  for (int k = 0; k <= max_losses_; ++k) {
    total += binomial_capped(n_cells_, k, budget);
    if (total > budget)
      throw Error(Errc::budget_exceeded, "schedule count exceeds budget " + std::to_string(budget));
  }
  total_ = total;
}

std::vector<Loss> ScheduleEnumerator::cell_to_loss(const std::vector<int>& cells) const {
  std::vector<Loss> losses;
  losses.reserve(cells.size());
  const int pairs = n_ * (n_ - 1);
  for (int cell : cells) {
    const int round = cell / pairs;
    int pair_index = cell % pairs;
    // ordered pairs (from, to), from-major, skipping the diagonal
    const int from = pair_index / (n_ - 1);
    int to = pair_index % (n_ - 1);
    if (to >= from) ++to;
    losses.push_back({static_cast<uint64_t>(round), static_cast<uint8_t>(from), static_cast<uint8_t>(to)});
  }
  return losses;
}

bool ScheduleEnumerator::advance_combo() {
  int i = current_k_ - 1;
  while (i >= 0 && combo_[i] == n_cells_ - current_k_ + i) --i;
  if (i < 0) return false;
  ++combo_[i];
  for (int j = i + 1; j < current_k_; ++j) combo_[j] = combo_[j - 1] + 1;
  return true;
}

std::optional<std::vector<Loss>> ScheduleEnumerator::next() {
  if (done_) return std::nullopt;
  if (!started_) {
    started_ = true;
    current_k_ = 0;
    return std::vector<Loss>{};  // the lossless schedule
  }
  if (current_k_ > 0 && advance_combo()) return cell_to_loss(combo_);
  ++current_k_;
  if (current_k_ > max_losses_ || current_k_ > n_cells_) {
    done_ = true;
    return std::nullopt;
  }
  combo_.resize(current_k_);
  for (int i = 0; i < current_k_; ++i) combo_[i] = i;
  return cell_to_loss(combo_);
}

ekf::EkfConfig tuned_ekf_config(const NoiseSpec& noise, double delta, double flow_height, double flow_alpha) {
  ekf::EkfConfig cfg;
  const double mpp = sensors::flow_meters_per_pixel(flow_height, flow_alpha, sensors::kDefaultFovTheta);
  const auto var_floor = [](double sigma, double floor) { return std::max(sigma * sigma, floor); };
  cfg.noise.r_fresh[ekf::kMeasGyroZ] = var_floor(noise.gyro_sigma, 1e-8);
  cfg.noise.r_fresh[ekf::kMeasFlowVx] = var_floor(noise.flow_sigma * mpp, 1e-8);
  cfg.noise.r_fresh[ekf::kMeasFlowVy] = var_floor(noise.flow_sigma * mpp, 1e-8);
  cfg.noise.r_fresh[ekf::kMeasPosX] = var_floor(1.2 * noise.uwb_sigma, 1e-8);
  cfg.noise.r_fresh[ekf::kMeasPosY] = var_floor(1.2 * noise.uwb_sigma, 1e-8);
  cfg.noise.r_stale = 1e6;

  ekf::Mat5 q = ekf::Mat5::Zero();
  const double q_vel = (noise.accel_sigma * noise.accel_sigma + 1e-4 * 1e-4) * delta;
  q(ekf::kX, ekf::kX) = 1e-12;
  q(ekf::kY, ekf::kY) = 1e-12;
  q(ekf::kVx, ekf::kVx) = q_vel;
  q(ekf::kVy, ekf::kVy) = q_vel;
  q(ekf::kTheta, ekf::kTheta) = var_floor(1e-3, 1e-10) * delta;
  cfg.noise.q = q;
  return cfg;
}

struct World::Robot {
  Robot(uint8_t id, const WorldConfig& cfg)
      : sync(id, cfg.sync), app_vm(id, cfg.sync.k_vote, cfg.sync.round_period) {}

  sync::Synchronizer sync;
  vm::RobotVm app_vm;
  PlantState plant;
  vm::LdmapBuilder ldmap;
  vm::Ldmap prev_snapshot;
  bool start_pending = true;
  vm::ManeuverCommand round_cmd;

  // full-fidelity pipeline
  std::optional<ekf::Ekf> filter;
  ekf::RobotState dead_reckoning;
  pubsub::Broker broker;
  pubsub::QueueRef imu_out, flow_out, uwb_out, state_out;
  pubsub::QueueRef imu_in, flow_in, uwb_in, state_in;
  uint8_t imu_handle = 0, flow_handle = 0, uwb_handle = 0, state_handle = 0;
  uint64_t sensor_step = 0;

  Rng actuation_rng{0};
  Rng sensor_rng{0};
};

World::World(WorldConfig config) : config_(std::move(config)) {
  if (config_.n_robots < 1 || config_.n_robots > static_cast<int>(IdSet::kMaxIds))
    throw Error(Errc::config_invalid, "n_robots must be in 1..=32");
  config_.sync.validate();
  if (!config_.initial_poses.empty() && config_.initial_poses.size() != static_cast<size_t>(config_.n_robots))
    throw Error(Errc::config_invalid, "initial_poses must match n_robots");
  if (config_.steps_per_round < 1) throw Error(Errc::config_invalid, "steps_per_round must be >= 1");
  if (config_.uwb_every_steps < 1) throw Error(Errc::config_invalid, "uwb_every_steps must be >= 1");
  if (config_.noise.gyro_sigma < 0 || config_.noise.flow_sigma < 0 || config_.noise.uwb_sigma < 0 ||
      config_.noise.accel_sigma < 0)
    throw Error(Errc::config_invalid, "noise sigmas must be >= 0");
  if (!(config_.ekf_delta > 0)) throw Error(Errc::config_invalid, "ekf_delta must be > 0");

  anchors_.scale = config_.arena_size;

  vm::BuiltinAppConfig app_cfg;
  app_cfg.k_vote = config_.sync.k_vote;
  app_cfg.round_period = config_.sync.round_period;
  app_cfg.arena_size = config_.arena_size;
  app_cfg.max_speed = config_.max_speed;

  Rng master(config_.seed);
  for (int i = 0; i < config_.n_robots; ++i) {
    auto r = std::make_unique<Robot>(static_cast<uint8_t>(i), config_);
    Pose pose;
    if (!config_.initial_poses.empty()) {
      pose = config_.initial_poses[static_cast<size_t>(i)];
    } else {
      const double c = config_.arena_size / 2.0;
      const double ring = config_.arena_size / 4.0;
      const double ang = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(config_.n_robots);
      pose = {c + ring * std::cos(ang), c + ring * std::sin(ang), 0.0};
    }
    r->plant = {pose.x, pose.y, pose.theta, 0.0, 0.0};
    r->actuation_rng = master.fork(2 * static_cast<uint64_t>(i) + 1);
    r->sensor_rng = master.fork(2 * static_cast<uint64_t>(i) + 2);

    if (!config_.app.empty())
      r->app_vm.register_app(vm::make_builtin_app(config_.app, static_cast<uint8_t>(i), &r->app_vm, app_cfg));

    if (config_.fidelity == Fidelity::kFull) {
      ekf::RobotState init;
      init.state << pose.x, pose.y, 0.0, 0.0, pose.theta;
      init.cov = ekf::Mat5::Identity() * 1e-4;
      ekf::EkfConfig ekf_cfg =
          tuned_ekf_config(config_.noise, config_.ekf_delta, config_.flow_height, config_.flow_alpha);
      ekf_cfg.mode = config_.ekf_mode;
      r->filter.emplace(init, ekf_cfg);
      r->dead_reckoning = init;

      r->imu_out = std::make_shared<pubsub::ByteQueue>(1);
      r->flow_out = std::make_shared<pubsub::ByteQueue>(1);
      r->uwb_out = std::make_shared<pubsub::ByteQueue>(1);
      r->state_out = std::make_shared<pubsub::ByteQueue>(1);
      r->imu_in = std::make_shared<pubsub::ByteQueue>(1);
      r->flow_in = std::make_shared<pubsub::ByteQueue>(1);
      r->uwb_in = std::make_shared<pubsub::ByteQueue>(1);
      r->state_in = std::make_shared<pubsub::ByteQueue>(1);
      r->imu_handle = r->broker.register_publisher(kTopicImu, 48, r->imu_out);
      r->flow_handle = r->broker.register_publisher(kTopicFlow, 16, r->flow_out);
      r->uwb_handle = r->broker.register_publisher(kTopicUwb, 32, r->uwb_out);
      r->state_handle = r->broker.register_publisher(config_.state_topic_id, 40, r->state_out);
      r->broker.subscribe(kTopicImu, {1}, r->imu_in);
      r->broker.subscribe(kTopicFlow, {2}, r->flow_in);
      r->broker.subscribe(kTopicUwb, {3}, r->uwb_in);
      r->broker.subscribe(config_.state_topic_id, {4}, r->state_in);
    }

    // seed the robot's own map entry so the round-0 snapshot is well formed
    vm::StateBeacon self_beacon{pose.x, pose.y, pose.theta, 0.0, 0.0};
    r->ldmap.observe(static_cast<uint8_t>(i), self_beacon, r->app_vm.payload(), 0);
    r->prev_snapshot = r->ldmap.snapshot(r->sync.membership_snapshot(), r->sync.op_mode(), 0);
    robots_.push_back(std::move(r));
  }
}

World::~World() = default;
World::World(World&&) noexcept = default;
World& World::operator=(World&&) noexcept = default;

int World::n_robots() const { return static_cast<int>(robots_.size()); }
const sync::Synchronizer& World::synchronizer(int robot) const { return robots_.at(robot)->sync; }
const PlantState& World::plant(int robot) const { return robots_.at(robot)->plant; }
const ekf::Ekf* World::filter(int robot) const {
  return robots_.at(robot)->filter ? &*robots_.at(robot)->filter : nullptr;
}
const vm::RobotVm& World::robot_vm(int robot) const { return robots_.at(robot)->app_vm; }
vm::RobotVm& World::robot_vm_mut(int robot) { return robots_.at(robot)->app_vm; }
const vm::Ldmap& World::last_snapshot(int robot) const { return robots_.at(robot)->prev_snapshot; }
const pubsub::ByteQueue* World::state_mailbox(int robot) const {
  return robots_.at(robot)->state_in ? robots_.at(robot)->state_in.get() : nullptr;
}

void World::set_app(int robot, vm::AppHooks hooks) { robots_.at(robot)->app_vm.register_app(std::move(hooks)); }

void World::physics_round(Robot& r, const vm::ManeuverCommand& cmd) {
  const bool full = config_.fidelity == Fidelity::kFull;
  const int steps = full ? config_.steps_per_round : 1;
  const double dt = full ? config_.ekf_delta : config_.sync.round_period;

  std::vector<uint8_t> tuple;
  for (int k = 0; k < steps; ++k) {
    if (config_.noise.accel_sigma > 0) {
      r.plant.vx += config_.noise.accel_sigma * std::sqrt(dt) * r.actuation_rng.normal();
      r.plant.vy += config_.noise.accel_sigma * std::sqrt(dt) * r.actuation_rng.normal();
    }
    r.plant = step_plant(r.plant, cmd, dt, config_.plant_lag_tau);
    // arena walls: clamp with zero-velocity reflection
    if (r.plant.x < 0.0) { r.plant.x = 0.0; r.plant.vx = 0.0; }
    if (r.plant.x > config_.arena_size) { r.plant.x = config_.arena_size; r.plant.vx = 0.0; }
    if (r.plant.y < 0.0) { r.plant.y = 0.0; r.plant.vy = 0.0; }
    if (r.plant.y > config_.arena_size) { r.plant.y = config_.arena_size; r.plant.vy = 0.0; }

    if (!full) continue;

    const RawSensorSample sample = sample_sensors(r.plant, config_.noise, anchors_, config_.flow_height,
                                                  config_.flow_alpha, cmd.yaw_rate, r.sensor_rng);
    pack_doubles(tuple, {sample.imu.accel_unit[0], sample.imu.accel_unit[1], sample.imu.accel_unit[2],
                         sample.imu.gyro_dps[0], sample.imu.gyro_dps[1], sample.imu.gyro_dps[2]});
    r.imu_out->push(tuple);
    r.broker.publish(r.imu_handle);
    pack_doubles(tuple, {sample.flow.delta_px_x, sample.flow.delta_px_y});
    r.flow_out->push(tuple);
    r.broker.publish(r.flow_handle);
    if (r.sensor_step % static_cast<uint64_t>(config_.uwb_every_steps) == 0) {
      pack_doubles(tuple, {sample.uwb.d[0], sample.uwb.d[1], sample.uwb.d[2], sample.uwb.d[3]});
      r.uwb_out->push(tuple);
      r.broker.publish(r.uwb_handle);
    }
    ++r.sensor_step;
    r.broker.broker_step();

    // state task: drain mailboxes, convert to SI, feed the filter
    if (auto raw = r.imu_in->pop()) {
      sensors::ImuRaw imu;
      for (int i = 0; i < 3; ++i) imu.accel_unit[i] = unpack_double(*raw, i);
      for (int i = 0; i < 3; ++i) imu.gyro_dps[i] = unpack_double(*raw, 3 + i);
      r.filter->on_gyro(sensors::imu_to_si(imu).gyro[2]);
    }
    if (auto raw = r.flow_in->pop()) {
      sensors::FlowRaw flow;
      flow.delta_px_x = unpack_double(*raw, 0);
      flow.delta_px_y = unpack_double(*raw, 1);
      flow.height_m = config_.flow_height;
      flow.mount_angle_alpha = config_.flow_alpha;
      const sensors::Velocity2 v = sensors::flow_to_velocity(flow);
      r.filter->on_flow(v.vx, v.vy);
    }
    if (auto raw = r.uwb_in->pop()) {
      sensors::UwbRanges ranges;
      for (int i = 0; i < 4; ++i) ranges.d[i] = unpack_double(*raw, i);
      try {
        const sensors::UwbFix fix = sensors::uwb_solve_position(ranges, anchors_);
        r.filter->on_position(fix.x, fix.y);
      } catch (const Error&) {
        // gated-out ranging (multipath-like sample); skip the fix
      }
    }

    const ekf::ControlInput u{0.0, 0.0, config_.ekf_delta};
    const ekf::RobotState& est = r.filter->step(u);
    r.dead_reckoning = ekf::predict(r.dead_reckoning, u, r.filter->config().noise, r.filter->config().mode);

    // publish the posterior on the state topic
    pack_doubles(tuple, {est.x(), est.y(), est.vx(), est.vy(), est.theta()});
    r.state_out->push(tuple);
    r.broker.publish(r.state_handle);
    r.broker.broker_step();

    const double fe = (est.x() - r.plant.x) * (est.x() - r.plant.x) + (est.y() - r.plant.y) * (est.y() - r.plant.y);
    const double de = (r.dead_reckoning.x() - r.plant.x) * (r.dead_reckoning.x() - r.plant.x) +
                      (r.dead_reckoning.y() - r.plant.y) * (r.dead_reckoning.y() - r.plant.y);
    metrics_.filter_sq_err += fe;
    metrics_.deadreck_sq_err += de;
    metrics_.steps += 1;
    const ekf::StepStats& stats = r.filter->last_stats();
    for (int i = 0; i < 5; ++i) {
      if (!stats.fresh[i]) continue;
      metrics_.norm_innov_sq[i] += stats.innovation[i] * stats.innovation[i] / stats.innovation_var[i];
      metrics_.norm_innov_count[i] += 1;
    }
  }
}

RoundReport World::run_round() {
  RoundReport rep;
  rep.round = round_;
  rep.robots.resize(robots_.size());

  // 1. maneuver starts scheduled by the previous end_of_round (or initial)
  for (size_t i = 0; i < robots_.size(); ++i) {
    Robot& r = *robots_[i];
    rep.robots[i].id = static_cast<uint8_t>(i);
    if (r.start_pending) {
      r.start_pending = false;
      for ([[maybe_unused]] const vm::VmEvent& ev : r.app_vm.start_maneuver(r.prev_snapshot, round_)) {
        WorldEvent we;
        we.kind = WorldEvent::Kind::kDurationClamped;
        rep.robots[i].events.push_back(we);
      }
    }
    r.round_cmd = (r.sync.proto_state() == sync::ProtoState::kProgress && r.app_vm.maneuver_active())
                      ? r.app_vm.command()
                      : vm::ManeuverCommand{};
  }

  // 2. broadcasts (frames cross the wire format both ways)
  std::vector<sync::SyncMessage> msgs(robots_.size());
  std::vector<std::array<uint8_t, sync::kWireSize>> frames(robots_.size());
  std::vector<vm::StateBeacon> beacons(robots_.size());
  for (size_t i = 0; i < robots_.size(); ++i) {
    Robot& r = *robots_[i];
    msgs[i] = r.sync.build_broadcast(r.app_vm.payload());
    frames[i] = sync::encode(msgs[i]);
    if (config_.fidelity == Fidelity::kFull) {
      const ekf::RobotState& est = r.filter->state();
      beacons[i] = {est.x(), est.y(), est.theta(), est.vx(), est.vy()};
    } else {
      beacons[i] = {r.plant.x, r.plant.y, r.plant.theta, r.plant.vx, r.plant.vy};
    }
    rep.robots[i].state_at_broadcast = msgs[i].proto_state;
    rep.robots[i].mode_at_broadcast = msgs[i].op_mode;
    r.ldmap.observe(static_cast<uint8_t>(i), beacons[i], msgs[i].payload, round_);
  }

  // 3. deliveries in fixed (sender, receiver) order
  for (size_t s = 0; s < robots_.size(); ++s) {
    for (size_t t = 0; t < robots_.size(); ++t) {
      if (s == t) continue;
      if (config_.drops.drops(round_, static_cast<uint8_t>(s), static_cast<uint8_t>(t))) {
        ++rep.dropped;
        continue;
      }
      const sync::SyncMessage msg = sync::decode(frames[s]);
      if (robots_[t]->sync.on_receive(msg) == sync::ReceiveResult::kIgnoredEvicted) {
        WorldEvent we;
        we.kind = WorldEvent::Kind::kIgnoredEvicted;
        we.peer = static_cast<uint8_t>(s);
        rep.robots[t].events.push_back(we);
      } else {
        robots_[t]->ldmap.observe(static_cast<uint8_t>(s), beacons[s], msg.payload, round_);
      }
      ++rep.delivered;
    }
  }

  // 4. maneuver progress; completions flip the synchronizer to WAIT
  for (size_t i = 0; i < robots_.size(); ++i) {
    Robot& r = *robots_[i];
    if (r.sync.proto_state() == sync::ProtoState::kProgress && r.app_vm.maneuver_active()) {
      if (r.app_vm.tick()) {
        r.sync.notify_maneuver_complete();
        r.app_vm.complete_maneuver(r.prev_snapshot, round_);
      }
    }
  }

  // 5. protocol end of round
  struct PendingStart {
    size_t robot;
    sync::RoundEvents ev;
  };
  std::vector<PendingStart> pending_starts;
  for (size_t i = 0; i < robots_.size(); ++i) {
    Robot& r = *robots_[i];
    const sync::RoundEvents ev = r.sync.end_of_round();
    for (uint8_t evicted : ev.evicted) {
      WorldEvent we;
      we.kind = WorldEvent::Kind::kEvicted;
      we.peer = evicted;
      rep.robots[i].events.push_back(we);
    }
    if (ev.went_autonomous) rep.robots[i].events.push_back({WorldEvent::Kind::kWentAutonomous});
    if (ev.went_cooperative) rep.robots[i].events.push_back({WorldEvent::Kind::kWentCooperative});
    if (ev.start_maneuver) {
      r.start_pending = true;
      pending_starts.push_back({i, ev});
    }
  }

  // 6. end-of-round snapshots, then the start records against them
  for (size_t i = 0; i < robots_.size(); ++i) {
    Robot& r = *robots_[i];
    r.prev_snapshot = r.ldmap.snapshot(r.sync.membership_snapshot(), r.sync.op_mode(), round_);
    rep.robots[i].mode_at_end = r.sync.op_mode();
  }
  for (const PendingStart& ps : pending_starts) {
    Robot& r = *robots_[ps.robot];
    StartRecord rec;
    rec.robot = static_cast<uint8_t>(ps.robot);
    rec.maneuver_index = ps.ev.maneuver_index;
    rec.round = round_;
    rec.mode = r.sync.op_mode();
    rec.late_join = ps.ev.late_join;
    rec.map_bytes = vm::canonical_bytes(r.prev_snapshot);
    rec.map_hash = vm::fnv1a64(rec.map_bytes);
    starts_.push_back(rec);
    WorldEvent we;
    we.kind = ps.ev.late_join ? WorldEvent::Kind::kLateJoin : WorldEvent::Kind::kStartManeuver;
    we.maneuver_index = ps.ev.maneuver_index;
    we.mode = rec.mode;
    we.ldmap_hash = rec.map_hash;
    rep.robots[ps.robot].events.push_back(we);
  }

  // 7. plant, sensors, filter
  for (size_t i = 0; i < robots_.size(); ++i) physics_round(*robots_[i], robots_[i]->round_cmd);

  for (size_t i = 0; i < robots_.size(); ++i) {
    Robot& r = *robots_[i];
    if (config_.fidelity == Fidelity::kFull) {
      const ekf::RobotState& est = r.filter->state();
      rep.robots[i].est_x = est.x();
      rep.robots[i].est_y = est.y();
      rep.robots[i].est_theta = est.theta();
      rep.robots[i].est_vx = est.vx();
      rep.robots[i].est_vy = est.vy();
    } else {
      rep.robots[i].est_x = r.plant.x;
      rep.robots[i].est_y = r.plant.y;
      rep.robots[i].est_theta = r.plant.theta;
      rep.robots[i].est_vx = r.plant.vx;
      rep.robots[i].est_vy = r.plant.vy;
    }
    rep.robots[i].true_x = r.plant.x;
    rep.robots[i].true_y = r.plant.y;
    rep.robots[i].true_theta = r.plant.theta;
  }

  ++round_;
  return rep;
}

}  // namespace syrof::simworld
