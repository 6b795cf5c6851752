#include <doctest.h>

#include <cmath>

#include "syrof/rng.hpp"
#include "syrof/sensors.hpp"

using namespace syrof;
using namespace syrof::sensors;

namespace {

/// Independent oracle for the flow footprint: intersect the two boundary rays
/// of the viewing cone with the ground plane using explicit ray-plane
/// geometry (no tan/cot shortcuts).
double footprint_by_ray_projection(double h, double alpha, double theta) {
  auto ground_hit = [&](double angle_from_vertical) {
    // sensor at (0, h), ray direction (sin a, -cos a); hits y=0 at t = h / cos a
    const double t = h / std::cos(angle_from_vertical);
    return t * std::sin(angle_from_vertical);
  };
  return ground_hit(alpha + theta / 2.0) - ground_hit(alpha - theta / 2.0);
}

UwbRanges ranges_from_point(double x, double y, double z, const AnchorLayout& layout) {
  UwbRanges r;
  for (int i = 0; i < 4; ++i) {
    const auto& a = layout.positions[i];
    const double dx = x - a.x * layout.scale;
    const double dy = y - a.y * layout.scale;
    const double dz = z - a.z * layout.scale;
    r.d[i] = std::sqrt(dx * dx + dy * dy + dz * dz);
  }
  return r;
}

}  // namespace

TEST_CASE("imu_to_si scales by g and degrees to radians") {
  ImuRaw raw;
  raw.accel_unit = {0.0, 0.0, 0.5};
  raw.gyro_dps = {0.0, 0.0, 90.0};
  const ImuSi si = imu_to_si(raw);
  CHECK_EQ(si.accel[2], doctest::Approx(4.905).epsilon(1e-12));
  CHECK_EQ(si.gyro[2], doctest::Approx(M_PI / 2.0).epsilon(1e-12));

  const ImuSi zeros = imu_to_si({});
  for (int i = 0; i < 3; ++i) {
    CHECK_EQ(zeros.accel[i], 0.0);
    CHECK_EQ(zeros.gyro[i], 0.0);
  }

  ImuRaw bad;
  bad.accel_unit = {std::nan(""), 0, 0};
  CHECK_THROWS_AS(imu_to_si(bad), Error);
}

TEST_CASE("imu_to_si is linear") {
  Rng rng(42);
  for (int i = 0; i < 200; ++i) {
    ImuRaw raw;
    for (auto& v : raw.accel_unit) v = rng.uniform(-2, 2);
    for (auto& v : raw.gyro_dps) v = rng.uniform(-500, 500);
    const double a = rng.uniform(-3, 3);
    ImuRaw scaled = raw;
    for (auto& v : scaled.accel_unit) v *= a;
    for (auto& v : scaled.gyro_dps) v *= a;
    const ImuSi lhs = imu_to_si(scaled);
    const ImuSi rhs = imu_to_si(raw);
    for (int k = 0; k < 3; ++k) {
      CHECK_EQ(lhs.accel[k], doctest::Approx(a * rhs.accel[k]).epsilon(1e-12));
      CHECK_EQ(lhs.gyro[k], doctest::Approx(a * rhs.gyro[k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("flow_to_velocity matches the trigonometric example and the ray oracle") {
  FlowRaw raw;
  raw.height_m = 1.0;
  raw.mount_angle_alpha = 0.0;
  raw.delta_px_x = 30.0;
  const Velocity2 v = flow_to_velocity(raw);
  const double expected = 2.0 * std::tan(12.5 * M_PI / 180.0);  // ~0.4433 m/s
  CHECK_EQ(v.vx, doctest::Approx(expected).epsilon(1e-12));
  CHECK_EQ(v.vx, doctest::Approx(0.4433).epsilon(1e-4));
  CHECK_EQ(v.vy, 0.0);

  Rng rng(7);
  for (int i = 0; i < 300; ++i) {
    const double h = rng.uniform(0.2, 3.0);
    const double theta = rng.uniform(0.2, 1.0);
    // beta in (0, pi/2) requires -theta/2 < alpha < (pi - theta)/2
    const double alpha = rng.uniform(-theta / 2.0 + 0.02, 0.4);
    const double oracle = footprint_by_ray_projection(h, alpha, theta) / kFlowImagePixels;
    CHECK_EQ(flow_meters_per_pixel(h, alpha, theta), doctest::Approx(oracle).epsilon(1e-9));
  }
}

TEST_CASE("flow_to_velocity is linear in the pixel rate and guards the geometry") {
  FlowRaw raw;
  raw.height_m = 1.4;
  raw.mount_angle_alpha = 0.1;
  raw.delta_px_x = 12.0;
  raw.delta_px_y = -8.0;
  const Velocity2 base = flow_to_velocity(raw);
  raw.delta_px_x *= 3.0;
  raw.delta_px_y *= 3.0;
  const Velocity2 scaled = flow_to_velocity(raw);
  CHECK_EQ(scaled.vx, doctest::Approx(3.0 * base.vx).epsilon(1e-12));
  CHECK_EQ(scaled.vy, doctest::Approx(3.0 * base.vy).epsilon(1e-12));

  raw.delta_px_x = 0.0;
  raw.delta_px_y = 0.0;
  const Velocity2 zero = flow_to_velocity(raw);
  CHECK_EQ(zero.vx, 0.0);
  CHECK_EQ(zero.vy, 0.0);

  FlowRaw degenerate;
  degenerate.mount_angle_alpha = (M_PI - degenerate.fov_theta) / 2.0;  // beta = 0
  CHECK_THROWS_AS(flow_to_velocity(degenerate), Error);
  degenerate.mount_angle_alpha = -(M_PI / 2.0);  // beta >= pi/2
  CHECK_THROWS_AS(flow_to_velocity(degenerate), Error);
  degenerate.mount_angle_alpha = 0.0;
  degenerate.height_m = 0.0;
  CHECK_THROWS_AS(flow_to_velocity(degenerate), Error);
}

TEST_CASE("uwb_offset_b midpoint and endpoint cases") {
  CHECK_EQ(uwb_offset_b(1.0, 1.0), doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK_EQ(uwb_offset_b(0.0, std::sqrt(2.0)), doctest::Approx(0.0).epsilon(1e-12));
  CHECK_EQ(uwb_offset_b(std::sqrt(2.0), 0.0), doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("uwb_solve_position recovers the stated example points") {
  AnchorLayout layout;  // unit scale

  SUBCASE("cube center") {
    UwbRanges r;
    r.d = {std::sqrt(0.75), std::sqrt(0.75), std::sqrt(0.75), std::sqrt(0.75)};
    const UwbFix fix = uwb_solve_position(r, layout);
    CHECK_EQ(fix.x, doctest::Approx(0.5).epsilon(1e-12));
    CHECK_EQ(fix.y, doctest::Approx(0.5).epsilon(1e-12));
    CHECK_EQ(fix.z, doctest::Approx(0.5).epsilon(1e-12));
    CHECK_LT(fix.residual, 1e-12);
  }

  SUBCASE("origin anchor") {
    UwbRanges r;
    r.d = {0.0, std::sqrt(2.0), std::sqrt(2.0), std::sqrt(2.0)};
    const UwbFix fix = uwb_solve_position(r, layout);
    CHECK_EQ(fix.x, doctest::Approx(0.0).epsilon(1e-12));
    CHECK_EQ(fix.y, doctest::Approx(0.0).epsilon(1e-12));
    CHECK_EQ(fix.z, doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("unit-x corner, the case the printed composition got wrong") {
    UwbRanges r;
    r.d = {1.0, 1.0, std::sqrt(3.0), 1.0};
    const UwbFix fix = uwb_solve_position(r, layout);
    CHECK_EQ(fix.x, doctest::Approx(1.0).epsilon(1e-12));
    CHECK_EQ(fix.y, doctest::Approx(0.0).epsilon(1e-12));
    CHECK_EQ(fix.z, doctest::Approx(0.0).epsilon(1e-12));

    // the transposed composition returns (0, 1, 0) here: document the trap
    const double m01 = (r.d[0] * r.d[0] - r.d[1] * r.d[1] + 2.0) / 2.0;
    const double m23 = 1.0 - (r.d[2] * r.d[2] - r.d[3] * r.d[3] + 2.0) / 2.0;
    CHECK_EQ((m01 + m23) / 2.0, doctest::Approx(0.0));  // printed "x"
    CHECK_EQ((m01 - m23) / 2.0, doctest::Approx(1.0));  // actual x
  }
}

TEST_CASE("uwb round-trip identity over random points, unit and scaled arenas") {
  Rng rng(99);
  AnchorLayout unit;
  AnchorLayout scaled;
  scaled.scale = 10.0;
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.uniform01(), y = rng.uniform01(), z = rng.uniform01();
    const UwbFix fix = uwb_solve_position(ranges_from_point(x, y, z, unit), unit);
    CHECK_LT(std::fabs(fix.x - x), 1e-9);
    CHECK_LT(std::fabs(fix.y - y), 1e-9);
    CHECK_LT(std::fabs(fix.z - z), 1e-9);
    CHECK_LT(fix.residual, 1e-12);

    const UwbFix big = uwb_solve_position(ranges_from_point(10 * x, 10 * y, 10 * z, scaled), scaled);
    CHECK_LT(std::fabs(big.x - 10 * x), 1e-8);
    CHECK_LT(std::fabs(big.y - 10 * y), 1e-8);
    CHECK_LT(std::fabs(big.z - 10 * z), 1e-8);
  }
}

TEST_CASE("uwb range gate rejects readings beyond the arena diameter") {
  AnchorLayout layout;
  layout.scale = 10.0;
  UwbRanges r;
  r.d = {5.0, 5.0, 5.0, 40.0};  // 4 arena units >> sqrt(3) + 0.5
  CHECK_THROWS_AS(uwb_solve_position(r, layout), Error);
  r.d = {-1.0, 5.0, 5.0, 5.0};
  CHECK_THROWS_AS(uwb_solve_position(r, layout), Error);
}

TEST_CASE("the two closed-form estimates agree on arbitrary range vectors") {
  // they are algebraically identical functions of the ranges, so the residual
  // stays at floating-point noise even for inconsistent inputs
  Rng rng(1234);
  AnchorLayout layout;
  for (int i = 0; i < 1000; ++i) {
    UwbRanges r;
    for (auto& d : r.d) d = rng.uniform(0.0, 2.0);
    const UwbFix fix = uwb_solve_position(r, layout, 1.0);
    CHECK_LT(fix.residual, 1e-12);
  }
}
