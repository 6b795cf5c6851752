#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>

#include "syrof/errors.hpp"

namespace syrof::ekf {

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;

// State vector layout: (x, y, vx, vy, theta).
inline constexpr int kX = 0;
inline constexpr int kY = 1;
inline constexpr int kVx = 2;
inline constexpr int kVy = 3;
inline constexpr int kTheta = 4;

// Measurement vector layout: (gyro_z, flow_vx, flow_vy, pos_x, pos_y).
inline constexpr int kMeasGyroZ = 0;
inline constexpr int kMeasFlowVx = 1;
inline constexpr int kMeasFlowVy = 2;
inline constexpr int kMeasPosX = 3;
inline constexpr int kMeasPosY = 4;

/// Wrap an angle to (-pi, pi].
double wrap_angle(double a);

struct RobotState {
  Vec5 state = Vec5::Zero();
  Mat5 cov = Mat5::Identity();

  double x() const { return state[kX]; }
  double y() const { return state[kY]; }
  double vx() const { return state[kVx]; }
  double vy() const { return state[kVy]; }
  double theta() const { return state[kTheta]; }
};

struct ControlInput {
  double u_a = 0;      // motor thrust, m/s^2 equivalent
  double u_theta = 0;  // steering rate, rad/s
  double delta = 0.05; // step period, seconds, > 0
};

struct Measurement {
  Vec5 z = Vec5::Zero();
  Vec5 r_diag = Vec5::Ones();
  std::array<bool, 5> fresh{};
};

struct NoiseConfig {
  Mat5 q = Mat5::Identity() * 1e-4;  // process noise, symmetric PSD
  Vec5 r_fresh = Vec5::Ones() * 1e-2;
  double r_stale = 1e6;
};

/// The printed forecast equations square velocities and inputs; the corrected
/// mode treats that as typography for first-order kinematics. Both ship.
enum class DynamicsMode {
  kCorrectedKinematics,
  kPaperLiteral,
};

/// One application of the active state-transition map f (no covariance, no wrap).
Vec5 dynamics(const Vec5& x, const ControlInput& u, DynamicsMode mode);

/// Analytic Jacobian of the active f with respect to the state.
Mat5 jacobian_f(const RobotState& s, const ControlInput& u, DynamicsMode mode);

/// Model forecast: X_hat = f(X) + f(U), P_hat = F P F^T + Q.
/// Throws NonFinite / CovarianceNotPSD.
RobotState predict(const RobotState& s, const ControlInput& u, const NoiseConfig& noise,
                   DynamicsMode mode = DynamicsMode::kCorrectedKinematics);

/// Step correction per the gain equations. The gyro entry observes the
/// orientation increment: it is reparameterized internally to a direct theta
/// observation theta_prev + delta*gyro_z with variance delta^2 * r_gyro, so the
/// measurement Jacobian is an exact selection matrix. theta_prev is the
/// pre-forecast orientation and delta the forecast period.
/// Throws SingularInnovation if the innovation covariance is not invertible.
RobotState correct(const RobotState& predicted, const Measurement& m, double theta_prev, double delta);

/// Diagnostics from the latest correction, for innovation-consistency checks.
struct StepStats {
  Vec5 innovation = Vec5::Zero();
  Vec5 innovation_var = Vec5::Zero();  // diagonal of J P J^T + R
  std::array<bool, 5> fresh{};
};

struct EkfConfig {
  NoiseConfig noise;
  DynamicsMode mode = DynamicsMode::kCorrectedKinematics;
};

/// Stateful filter following the sensor-assembly pattern: sensors deliver
/// asynchronously into single-slot mailboxes, step() runs at a fixed rate,
/// fuses whatever arrived since the previous step (everything else is carried
/// at stale uncertainty), and resets the mailboxes afterwards.
class Ekf {
 public:
  Ekf(RobotState initial, EkfConfig config);

  void on_gyro(double gyro_z);
  void on_flow(double vx, double vy);
  void on_position(double x, double y);

  /// One predict+correct cycle; returns the posterior (also kept internally).
  const RobotState& step(const ControlInput& u);

  const RobotState& state() const { return state_; }
  const StepStats& last_stats() const { return stats_; }
  const EkfConfig& config() const { return config_; }

 private:
  RobotState state_;
  EkfConfig config_;
  Vec5 last_z_;
  std::array<bool, 5> fresh_{};
  StepStats stats_;
};

}  // namespace syrof::ekf
