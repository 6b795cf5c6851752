#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "syrof/errors.hpp"
#include "syrof/ldmap.hpp"

namespace syrof::geom {

/// Labeled planar points. Ids are unique; coordinates finite.
struct PointSet {
  struct Point {
    uint8_t id = 0;
    double x = 0, y = 0;
  };
  std::vector<Point> points;
};

struct Circle {
  double cx = 0, cy = 0;
  double radius = 0;
};

/// Members in the map.
int number_of_members(const vm::Ldmap& map);

/// Minimum id among members. Throws EmptyMap.
uint8_t leader(const vm::Ldmap& map);

/// Member positions as a point set.
PointSet points_from_ldmap(const vm::Ldmap& map);

/// Minimal-radius circle containing every point. Deterministic for any input
/// order (points are canonicalized first). Throws EmptySet.
Circle smallest_enclosing_circle(const PointSet& ps);

/// Hull vertex ids in counter-clockwise order starting from the
/// lowest-then-leftmost point; collinear boundary points excluded. Coincident
/// points contribute the smallest id. Throws EmptySet.
std::vector<uint8_t> convex_hull(const PointSet& ps);

enum class MatchObjective {
  kBottleneck,  // minimize the largest robot-target distance, then total, then lexicographic
  kMinSum,      // minimize total distance, then lexicographic
};

struct Matching {
  std::vector<std::pair<uint8_t, uint8_t>> pairs;  // (robot id, target id), ascending robot id
  double bottleneck = 0;
  double total = 0;
};

/// Perfect robot-target assignment. Throws SizeMismatch when the sets differ
/// in size. The result is a pure function of the two point sets, independent
/// of input order, so every robot computes the same assignment.
Matching min_weighted_matching(const PointSet& robots, const PointSet& targets,
                               MatchObjective objective = MatchObjective::kBottleneck);

}  // namespace syrof::geom
