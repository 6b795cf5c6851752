#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "syrof/errors.hpp"

namespace syrof::sensors {

inline constexpr double kGravity = 9.81;           // m/s^2 per unit of raw acceleration
inline constexpr double kFlowImagePixels = 30.0;   // pixels across each image axis
inline constexpr double kDefaultFovTheta = 25.0 * M_PI / 180.0;

struct Vec3 {
  double x = 0, y = 0, z = 0;
};

/// Raw IMU reading: acceleration in multiples of g, angular rate in deg/s.
struct ImuRaw {
  std::array<double, 3> accel_unit{};
  std::array<double, 3> gyro_dps{};
};

/// IMU reading in SI units: m/s^2 and rad/s.
struct ImuSi {
  std::array<double, 3> accel{};
  std::array<double, 3> gyro{};
};

/// Raw optical-flow reading plus the mount geometry needed to scale it.
struct FlowRaw {
  double delta_px_x = 0;  // pixels/second
  double delta_px_y = 0;
  double height_m = 1.0;                    // sensor height above ground, > 0
  double mount_angle_alpha = 0.0;           // radians
  double fov_theta = kDefaultFovTheta;      // effective viewing angle, radians
};

struct Velocity2 {
  double vx = 0, vy = 0;
};

/// Four ranging distances, meters, in anchor order d0..d3.
struct UwbRanges {
  std::array<double, 4> d{};
};

/// Anchor stations on the canonical unit-cube layout:
/// a0=(0,0,0), a1=(1,1,0), a2=(0,1,1), a3=(1,0,1), all pairs sqrt(2) apart.
/// `scale` converts arena units to meters.
struct AnchorLayout {
  std::array<Vec3, 4> positions{Vec3{0, 0, 0}, Vec3{1, 1, 0}, Vec3{0, 1, 1}, Vec3{1, 0, 1}};
  double scale = 1.0;
};

struct UwbFix {
  double x = 0, y = 0, z = 0;  // meters
  double residual = 0;         // arena units: max disagreement between the redundant estimates
};

/// accel * 9.81, gyro * pi/180. Throws NonFinite on non-finite input.
ImuSi imu_to_si(const ImuRaw& raw);

/// Ground footprint of one image axis, meters per pixel for the given geometry.
/// The 30-pixel image spans h*(tan(alpha + theta/2) - tan(alpha - theta/2)) on
/// the ground, equivalently h*cot(beta) - a with beta = (pi - theta)/2 - alpha
/// and a = h*tan(alpha - theta/2).
double flow_meters_per_pixel(double height_m, double mount_angle_alpha, double fov_theta);

/// Pixel rates to lateral ground velocity. Throws DegenerateGeometry when
/// beta = (pi - theta)/2 - alpha falls outside (0, pi/2).
Velocity2 flow_to_velocity(const FlowRaw& raw);

/// Foot-of-perpendicular offset along an anchor pair: (d_i^2 - d_j^2 + 2) / (2*sqrt(2)).
/// Inputs in arena units.
double uwb_offset_b(double d_i, double d_j);

/// Closed-form position from the four anchor ranges (meters). Throws
/// Inconsistent when a range exceeds the arena diameter by more than
/// range_slack, or when the redundant coordinate estimates disagree by more
/// than residual_gate (both in arena units).
UwbFix uwb_solve_position(const UwbRanges& ranges, const AnchorLayout& layout, double residual_gate = 0.1,
                          double range_slack = 0.5);

}  // namespace syrof::sensors
