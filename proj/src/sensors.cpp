#include "syrof/sensors.hpp"

#include <algorithm>
#include <cmath>

namespace syrof::sensors {

namespace {

bool all_finite(const std::array<double, 3>& v) {
  return std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]);
}

}  // namespace

ImuSi imu_to_si(const ImuRaw& raw) {
  if (!all_finite(raw.accel_unit) || !all_finite(raw.gyro_dps))
    throw Error(Errc::non_finite, "imu_to_si: non-finite raw sample");
  ImuSi out;
  constexpr double kDegToRad = M_PI / 180.0;
  for (int i = 0; i < 3; ++i) {
    out.accel[i] = raw.accel_unit[i] * kGravity;
    out.gyro[i] = raw.gyro_dps[i] * kDegToRad;
  }
  return out;
}

double flow_meters_per_pixel(double height_m, double mount_angle_alpha, double fov_theta) {
  if (!(height_m > 0.0) || !std::isfinite(mount_angle_alpha) || !(fov_theta > 0.0) || !(fov_theta < M_PI))
    throw Error(Errc::degenerate_geometry, "flow geometry out of range");
  const double beta = (M_PI - fov_theta) / 2.0 - mount_angle_alpha;
  if (beta <= 0.0 || beta >= M_PI / 2.0)
    throw Error(Errc::degenerate_geometry, "flow beta outside (0, pi/2)");
  const double a = height_m * std::tan(mount_angle_alpha - fov_theta / 2.0);
  const double footprint = height_m / std::tan(beta) - a;  // h*cot(beta) - a
  return footprint / kFlowImagePixels;
}

Velocity2 flow_to_velocity(const FlowRaw& raw) {
  if (!std::isfinite(raw.delta_px_x) || !std::isfinite(raw.delta_px_y))
    throw Error(Errc::non_finite, "flow_to_velocity: non-finite pixel rate");
  const double mpp = flow_meters_per_pixel(raw.height_m, raw.mount_angle_alpha, raw.fov_theta);
  return {raw.delta_px_x * mpp, raw.delta_px_y * mpp};
}

double uwb_offset_b(double d_i, double d_j) {
  return (d_i * d_i - d_j * d_j + 2.0) / (2.0 * std::sqrt(2.0));
}

UwbFix uwb_solve_position(const UwbRanges& ranges, const AnchorLayout& layout, double residual_gate,
                          double range_slack) {
  if (!(layout.scale > 0.0)) throw Error(Errc::degenerate_geometry, "anchor scale must be > 0");
  const double max_range = std::sqrt(3.0) + range_slack;  // arena diameter plus tolerance
  std::array<double, 4> d;  // arena units
  for (int i = 0; i < 4; ++i) {
    if (!std::isfinite(ranges.d[i]) || ranges.d[i] < 0.0)
      throw Error(Errc::non_finite, "uwb range " + std::to_string(i));
    d[i] = ranges.d[i] / layout.scale;
    if (d[i] > max_range)
      throw Error(Errc::inconsistent_ranging,
                  "range " + std::to_string(i) + " of " + std::to_string(d[i]) + " arena units exceeds the gate");
  }
  const auto sq = [](double v) { return v * v; };

  // Perpendicular intercepts of the three anchor-pair diagonals. Expanding the
  // squared distances on the unit-cube layout gives
  //   m01 = x+y, m23 = y-x, m02 = y+z, m13 = y-z, m03 = x+z, m12 = x-z,
  // which forces the composition below (the one that inverts; see the
  // round-trip tests).
  const double m01 = (sq(d[0]) - sq(d[1]) + 2.0) / 2.0;
  const double m23 = 1.0 - (sq(d[2]) - sq(d[3]) + 2.0) / 2.0;
  const double m02 = (sq(d[0]) - sq(d[2]) + 2.0) / 2.0;
  const double m13 = 1.0 - (sq(d[1]) - sq(d[3]) + 2.0) / 2.0;
  const double m03 = (sq(d[0]) - sq(d[3]) + 2.0) / 2.0;
  const double m12 = 1.0 - (sq(d[1]) - sq(d[2]) + 2.0) / 2.0;

  const double x1 = (m01 - m23) / 2.0, x2 = (m03 + m12) / 2.0;
  const double y1 = (m01 + m23) / 2.0, y2 = (m02 + m13) / 2.0;
  const double z1 = (m02 - m13) / 2.0, z2 = (m03 - m12) / 2.0;

  UwbFix fix;
  fix.residual = std::max({std::fabs(x1 - x2), std::fabs(y1 - y2), std::fabs(z1 - z2)});
  if (fix.residual > residual_gate)
    throw Error(Errc::inconsistent_ranging,
                "uwb residual " + std::to_string(fix.residual) + " exceeds gate " + std::to_string(residual_gate));
  fix.x = (x1 + x2) / 2.0 * layout.scale;
  fix.y = (y1 + y2) / 2.0 * layout.scale;
  fix.z = (z1 + z2) / 2.0 * layout.scale;
  return fix;
}

}  // namespace syrof::sensors
