#include "syrof/ekf.hpp"

#include <cmath>

namespace syrof::ekf {

namespace {

/// Symmetrize, verify the eigenvalues clear -1e-9, clamp tiny negatives to zero.
void condition_covariance(Mat5& p) {
  p = ((p + p.transpose()) / 2.0).eval();
  Eigen::SelfAdjointEigenSolver<Mat5> eig(p);
  const double min_eig = eig.eigenvalues().minCoeff();
  if (min_eig < -1e-9)
    throw Error(Errc::covariance_not_psd, "min eigenvalue " + std::to_string(min_eig));
  if (min_eig < 0.0) {
    Vec5 clamped = eig.eigenvalues().cwiseMax(0.0);
    p = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
    p = ((p + p.transpose()) / 2.0).eval();
  }
}

// Measurement row i of the selection Jacobian observes state component sel[i]
// (the gyro row observes theta after the increment reparameterization).
constexpr std::array<int, 5> kMeasSelect = {kTheta, kVx, kVy, kX, kY};

}  // namespace

double wrap_angle(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a <= 0.0) a += 2.0 * M_PI;
  return a - M_PI;
}

Vec5 dynamics(const Vec5& x, const ControlInput& u, DynamicsMode mode) {
  Vec5 out;
  if (mode == DynamicsMode::kCorrectedKinematics) {
    const double theta_next = x[kTheta] + u.delta * u.u_theta;
    out[kX] = x[kX] + u.delta * x[kVx];
    out[kY] = x[kY] + u.delta * x[kVy];
    out[kVx] = x[kVx] + u.delta * u.u_a * std::cos(theta_next);
    out[kVy] = x[kVy] + u.delta * u.u_a * std::sin(theta_next);
    out[kTheta] = theta_next;
  } else {
    // Verbatim forecast block: squared velocities and inputs.
    const double input_angle = u.delta * u.u_theta * u.u_theta / 2.0;
    out[kX] = x[kX] + u.delta * x[kVx] * x[kVx] / 2.0;
    out[kY] = x[kY] + u.delta * x[kVy] * x[kVy] / 2.0;
    out[kVx] = x[kVx] + u.delta * (u.u_a * u.u_a / 2.0) * std::cos(input_angle);
    out[kVy] = x[kVy] + u.delta * (u.u_a * u.u_a / 2.0) * std::sin(input_angle);
    out[kTheta] = x[kTheta] + input_angle;
  }
  return out;
}

Mat5 jacobian_f(const RobotState& s, const ControlInput& u, DynamicsMode mode) {
  Mat5 f = Mat5::Identity();
  if (mode == DynamicsMode::kCorrectedKinematics) {
    const double theta_next = s.theta() + u.delta * u.u_theta;
    f(kX, kVx) = u.delta;
    f(kY, kVy) = u.delta;
    f(kVx, kTheta) = -u.delta * u.u_a * std::sin(theta_next);
    f(kVy, kTheta) = u.delta * u.u_a * std::cos(theta_next);
  } else {
    f(kX, kVx) = u.delta * s.vx();
    f(kY, kVy) = u.delta * s.vy();
    // velocity and orientation rows depend on inputs only
  }
  return f;
}

RobotState predict(const RobotState& s, const ControlInput& u, const NoiseConfig& noise, DynamicsMode mode) {
  if (!(u.delta > 0.0)) throw Error(Errc::non_finite, "predict: delta must be > 0");
  if (!s.state.allFinite()) throw Error(Errc::non_finite, "predict: non-finite state");
  RobotState out;
  out.state = dynamics(s.state, u, mode);
  if (!out.state.allFinite()) throw Error(Errc::non_finite, "predict: non-finite forecast");
  out.state[kTheta] = wrap_angle(out.state[kTheta]);
  const Mat5 f = jacobian_f(s, u, mode);
  out.cov = f * s.cov * f.transpose() + noise.q;
  condition_covariance(out.cov);
  return out;
}

RobotState correct(const RobotState& predicted, const Measurement& m, double theta_prev, double delta) {
  if (!(delta > 0.0)) throw Error(Errc::non_finite, "correct: delta must be > 0");

  // Selection Jacobian: one state component per measurement row.
  Eigen::Matrix<double, 5, 5> j = Eigen::Matrix<double, 5, 5>::Zero();
  for (int i = 0; i < 5; ++i) j(i, kMeasSelect[i]) = 1.0;

  // Effective observation and noise: the gyro rate becomes an orientation
  // observation theta_prev + delta * gyro_z.
  Vec5 innovation;
  Vec5 r = m.r_diag;
  for (int i = 0; i < 5; ++i) {
    if (i == kMeasGyroZ) {
      const double theta_obs = theta_prev + delta * m.z[kMeasGyroZ];
      innovation[i] = wrap_angle(theta_obs - predicted.theta());
      // the delta^2 factor is the rate-to-angle unit transform; a stale entry
      // already carries the raw high-uncertainty variance
      if (m.fresh[kMeasGyroZ]) r[i] = m.r_diag[kMeasGyroZ] * delta * delta;
    } else {
      innovation[i] = m.z[i] - predicted.state[kMeasSelect[i]];
    }
  }

  const Mat5 s_mat = j * predicted.cov * j.transpose() + Mat5(r.asDiagonal());
  Eigen::FullPivLU<Mat5> lu(s_mat);
  if (!lu.isInvertible())
    throw Error(Errc::singular_innovation, "innovation covariance not invertible");
  const Mat5 k = predicted.cov * j.transpose() * lu.inverse();

  RobotState out;
  out.state = predicted.state + k * innovation;
  out.state[kTheta] = wrap_angle(out.state[kTheta]);
  if (!out.state.allFinite()) throw Error(Errc::non_finite, "correct: non-finite posterior");
  out.cov = (Mat5::Identity() - k * j) * predicted.cov;
  condition_covariance(out.cov);
  return out;
}

Ekf::Ekf(RobotState initial, EkfConfig config) : state_(std::move(initial)), config_(config) {
  if (config_.noise.r_stale < 1e3 * config_.noise.r_fresh.maxCoeff())
    throw Error(Errc::config_invalid, "r_stale must dominate r_fresh by 1e3");
  if ((config_.noise.r_fresh.array() <= 0.0).any())
    throw Error(Errc::config_invalid, "r_fresh entries must be > 0");
  last_z_ = Vec5::Zero();
  last_z_[kMeasFlowVx] = state_.vx();
  last_z_[kMeasFlowVy] = state_.vy();
  last_z_[kMeasPosX] = state_.x();
  last_z_[kMeasPosY] = state_.y();
}

void Ekf::on_gyro(double gyro_z) {
  last_z_[kMeasGyroZ] = gyro_z;
  fresh_[kMeasGyroZ] = true;
}

void Ekf::on_flow(double vx, double vy) {
  last_z_[kMeasFlowVx] = vx;
  last_z_[kMeasFlowVy] = vy;
  fresh_[kMeasFlowVx] = true;
  fresh_[kMeasFlowVy] = true;
}

void Ekf::on_position(double x, double y) {
  last_z_[kMeasPosX] = x;
  last_z_[kMeasPosY] = y;
  fresh_[kMeasPosX] = true;
  fresh_[kMeasPosY] = true;
}

const RobotState& Ekf::step(const ControlInput& u) {
  Measurement m;
  m.z = last_z_;
  for (int i = 0; i < 5; ++i) {
    m.fresh[i] = fresh_[i];
    m.r_diag[i] = fresh_[i] ? config_.noise.r_fresh[i] : config_.noise.r_stale;
  }
  const double theta_prev = state_.theta();
  const RobotState forecast = predict(state_, u, config_.noise, config_.mode);

  // innovation diagnostics (selection rows; gyro row in theta units)
  Eigen::Matrix<double, 5, 5> j = Eigen::Matrix<double, 5, 5>::Zero();
  for (int i = 0; i < 5; ++i) j(i, kMeasSelect[i]) = 1.0;
  Vec5 r_eff = m.r_diag;
  if (m.fresh[kMeasGyroZ]) r_eff[kMeasGyroZ] *= u.delta * u.delta;
  const Mat5 s_mat = j * forecast.cov * j.transpose() + Mat5(r_eff.asDiagonal());
  for (int i = 0; i < 5; ++i) {
    if (i == kMeasGyroZ)
      stats_.innovation[i] = wrap_angle(theta_prev + u.delta * m.z[i] - forecast.theta());
    else
      stats_.innovation[i] = m.z[i] - forecast.state[kMeasSelect[i]];
    stats_.innovation_var[i] = s_mat(i, i);
    stats_.fresh[i] = m.fresh[i];
  }

  state_ = correct(forecast, m, theta_prev, u.delta);
  fresh_ = {};  // measurements consumed; everything stale until new arrivals
  return state_;
}

}  // namespace syrof::ekf
