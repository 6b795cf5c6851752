#include <doctest.h>

#include <cmath>

#include "syrof/ekf.hpp"
#include "syrof/rng.hpp"

using namespace syrof;
using namespace syrof::ekf;

namespace {

Mat5 central_difference_jacobian(const Vec5& x, const ControlInput& u, DynamicsMode mode) {
  constexpr double kStep = 1e-6;
  Mat5 fd;
  for (int j = 0; j < 5; ++j) {
    Vec5 hi = x, lo = x;
    hi[j] += kStep;
    lo[j] -= kStep;
    fd.col(j) = (dynamics(hi, u, mode) - dynamics(lo, u, mode)) / (2.0 * kStep);
  }
  return fd;
}

RobotState make_state(double x, double y, double vx, double vy, double theta, const Mat5& cov) {
  RobotState s;
  s.state << x, y, vx, vy, theta;
  s.cov = cov;
  return s;
}

}  // namespace

TEST_CASE("predict: stationary robot only grows by Q") {
  NoiseConfig noise;
  noise.q = Mat5::Identity() * 0.01;
  const RobotState s = make_state(2, 3, 0, 0, 0.5, Mat5::Identity() * 0.1);
  const RobotState out = predict(s, {0, 0, 0.1}, noise);
  CHECK_EQ(out.x(), 2.0);
  CHECK_EQ(out.y(), 3.0);
  CHECK_EQ(out.vx(), 0.0);
  CHECK_EQ(out.theta(), doctest::Approx(0.5));
  const Mat5 f = jacobian_f(s, {0, 0, 0.1}, DynamicsMode::kCorrectedKinematics);
  const Mat5 expected = f * s.cov * f.transpose() + noise.q;
  CHECK_LT((out.cov - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST_CASE("predict: straight-line kinematics in corrected mode") {
  NoiseConfig noise;
  const RobotState s = make_state(1, 0, 1, 0, 0, Mat5::Identity() * 1e-3);
  const RobotState out = predict(s, {0, 0, 0.1}, noise);
  CHECK_EQ(out.x(), doctest::Approx(1.1).epsilon(1e-12));
  CHECK_EQ(out.vx(), doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("predict: the verbatim forecast block squares the velocity") {
  NoiseConfig noise;
  const RobotState s = make_state(1, 0, 1, 0, 0, Mat5::Identity() * 1e-3);
  const RobotState out = predict(s, {0, 0, 0.1}, noise, DynamicsMode::kPaperLiteral);
  CHECK_EQ(out.x(), doctest::Approx(1.05).epsilon(1e-12));  // x + delta * vx^2 / 2
}

TEST_CASE("predict guards") {
  NoiseConfig noise;
  RobotState s;
  CHECK_THROWS_AS(predict(s, {0, 0, 0.0}, noise), Error);
  s.state[kX] = std::nan("");
  CHECK_THROWS_AS(predict(s, {0, 0, 0.1}, noise), Error);
}

TEST_CASE("jacobian entries follow the spec") {
  const RobotState s = make_state(0.3, -0.4, 1.2, 0.5, 0.7, Mat5::Identity());
  SUBCASE("corrected mode, position row") {
    const Mat5 f = jacobian_f(s, {0.4, 0.2, 0.05}, DynamicsMode::kCorrectedKinematics);
    CHECK_EQ(f(kX, kVx), doctest::Approx(0.05));
    CHECK_EQ(f(kTheta, kTheta), 1.0);
  }
  SUBCASE("corrected mode, zero thrust collapses to the constant-velocity block") {
    const Mat5 f = jacobian_f(s, {0.0, 0.0, 0.05}, DynamicsMode::kCorrectedKinematics);
    Mat5 expected = Mat5::Identity();
    expected(kX, kVx) = 0.05;
    expected(kY, kVy) = 0.05;
    CHECK_LT((f - expected).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST_CASE("analytic jacobians match central differences on 1000 random states") {
  Rng rng(31337);
  for (int i = 0; i < 1000; ++i) {
    RobotState s = make_state(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-2, 2), rng.uniform(-2, 2),
                              rng.uniform(-3, 3), Mat5::Identity());
    const ControlInput u{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.01, 0.2)};
    const DynamicsMode mode = (i % 2 == 0) ? DynamicsMode::kCorrectedKinematics : DynamicsMode::kPaperLiteral;
    const Mat5 analytic = jacobian_f(s, u, mode);
    const Mat5 fd = central_difference_jacobian(s.state, u, mode);
    for (int r = 0; r < 5; ++r)
      for (int c = 0; c < 5; ++c) {
        const double scale = std::max(1.0, std::fabs(fd(r, c)));
        CHECK_LT(std::fabs(analytic(r, c) - fd(r, c)) / scale, 1e-5);
      }
  }
}

TEST_CASE("correct: zero innovation leaves the state and shrinks fresh variance") {
  RobotState s = make_state(1, 2, 0.5, -0.5, 0.3, Mat5::Identity() * 0.5);
  Measurement m;
  const double delta = 0.1, theta_prev = 0.3;
  m.z[kMeasGyroZ] = 0.0;  // theta unchanged by the forecast in this setup
  m.z[kMeasFlowVx] = 0.5;
  m.z[kMeasFlowVy] = -0.5;
  m.z[kMeasPosX] = 1.0;
  m.z[kMeasPosY] = 2.0;
  m.r_diag = Vec5::Ones() * 0.25;
  m.fresh = {true, true, true, true, true};
  const RobotState out = correct(s, m, theta_prev, delta);
  CHECK_LT((out.state - s.state).cwiseAbs().maxCoeff(), 1e-12);
  CHECK_LT(out.cov.trace(), s.cov.trace());
}

TEST_CASE("correct: one-dimensional gain is a half") {
  RobotState s = make_state(0, 0, 0, 0, 0, Mat5::Identity());
  Measurement m;
  m.z[kMeasPosX] = 1.0;
  m.r_diag = Vec5::Ones() * 1e9;
  m.r_diag[kMeasPosX] = 1.0;
  m.fresh = {};
  m.fresh[kMeasPosX] = true;
  const RobotState out = correct(s, m, 0.0, 0.1);
  CHECK_EQ(out.x(), doctest::Approx(0.5).epsilon(1e-6));
  CHECK_EQ(out.cov(kX, kX), doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("correct: all-stale measurements leave the prior within 1e-3") {
  RobotState s = make_state(1.5, -2.0, 0.7, 0.2, 1.1, Mat5::Identity() * 2.0);
  Measurement m;
  m.z << 0.3, 5.0, -4.0, 9.0, -9.0;  // junk: the stale variances mute it
  m.r_diag = Vec5::Ones() * 1e6;
  m.fresh = {};
  const RobotState out = correct(s, m, 1.1, 0.1);
  for (int i = 0; i < 5; ++i)
    CHECK_LT(std::fabs(out.state[i] - s.state[i]), 1e-3 * (1.0 + std::fabs(s.state[i])));
}

TEST_CASE("Ekf::step with no arrivals tracks the pure forecast to 1e-3") {
  EkfConfig cfg;
  cfg.noise.q = Mat5::Identity() * 1e-6;
  RobotState init = make_state(0, 0, 0.4, -0.2, 0.2, Mat5::Identity() * 0.01);
  Ekf filter(init, cfg);
  RobotState manual = init;
  const ControlInput u{0, 0, 0.05};
  for (int i = 0; i < 50; ++i) {
    filter.step(u);
    manual = predict(manual, u, cfg.noise, cfg.mode);
  }
  for (int i = 0; i < 5; ++i)
    CHECK_LT(std::fabs(filter.state().state[i] - manual.state[i]),
             1e-3 * (1.0 + std::fabs(manual.state[i])));
}

TEST_CASE("Ekf::step pulls the posterior toward a position fix") {
  EkfConfig cfg;
  cfg.noise.r_fresh = Vec5::Ones() * 0.01;
  RobotState init = make_state(0, 0, 0, 0, 0, Mat5::Identity() * 0.5);
  Ekf filter(init, cfg);
  filter.on_position(1.0, 0.0);
  const RobotState& out = filter.step({0, 0, 0.05});
  CHECK_GT(out.x(), 0.0);
  CHECK_LT(std::fabs(out.x() - 1.0), 1.0);  // strictly closer to the fix than the prior
}

TEST_CASE("Ekf mailboxes keep only the latest sensor tuple") {
  EkfConfig cfg;
  RobotState init = make_state(0, 0, 0, 0, 0, Mat5::Identity() * 0.5);
  Ekf filter(init, cfg);
  filter.on_flow(1.0, 0.0);
  filter.on_flow(2.0, 0.0);  // overwrites
  filter.step({0, 0, 0.05});
  CHECK_EQ(filter.last_stats().innovation[kMeasFlowVx], doctest::Approx(2.0).epsilon(1e-9));
  // consumed: the next step sees everything stale
  filter.step({0, 0, 0.05});
  CHECK_FALSE(filter.last_stats().fresh[kMeasFlowVx]);
}

TEST_CASE("covariance stays symmetric PSD across a long randomized run") {
  Rng rng(777);
  EkfConfig cfg;
  cfg.noise.q = Mat5::Identity() * 1e-5;
  cfg.noise.r_fresh << 1e-4, 1e-3, 1e-3, 1e-2, 1e-2;
  Ekf filter(make_state(0, 0, 0, 0, 0, Mat5::Identity() * 0.1), cfg);
  for (int i = 0; i < 5000; ++i) {
    if (rng.uniform01() < 0.8) filter.on_gyro(rng.normal() * 0.1);
    if (rng.uniform01() < 0.6) filter.on_flow(rng.normal(), rng.normal());
    if (rng.uniform01() < 0.3) filter.on_position(rng.normal() * 3, rng.normal() * 3);
    const ControlInput u{rng.uniform(-0.5, 0.5), rng.uniform(-0.3, 0.3), 0.05};
    const RobotState& s = filter.step(u);
    if (i % 100 == 0 || i == 4999) {
      CHECK_LT((s.cov - s.cov.transpose()).cwiseAbs().maxCoeff(), 1e-12);
      Eigen::SelfAdjointEigenSolver<Mat5> eig(s.cov);
      CHECK_GE(eig.eigenvalues().minCoeff(), -1e-9);
    }
  }
}

TEST_CASE("a degenerate innovation covariance is reported, not inverted") {
  RobotState s;
  s.cov = Mat5::Zero();
  Measurement m;
  m.r_diag = Vec5::Zero();  // deliberately violates the r_diag > 0 invariant
  CHECK_THROWS_AS(correct(s, m, 0.0, 0.1), Error);
}

TEST_CASE("the stale variance must dominate the fresh variances") {
  EkfConfig cfg;
  cfg.noise.r_fresh = Vec5::Ones();
  cfg.noise.r_stale = 10.0;  // below the 1e3 separation
  CHECK_THROWS_AS(Ekf(RobotState{}, cfg), Error);
}

TEST_CASE("theta wraps to (-pi, pi] through prediction") {
  NoiseConfig noise;
  RobotState s = make_state(0, 0, 0, 0, 3.1, Mat5::Identity() * 1e-3);
  const RobotState out = predict(s, {0, 2.0, 0.1}, noise);  // theta 3.1 + 0.2 wraps negative
  CHECK_LT(out.theta(), 0.0);
  CHECK_GT(out.theta(), -M_PI);
  CHECK_EQ(out.theta(), doctest::Approx(3.3 - 2 * M_PI).epsilon(1e-9));
}
