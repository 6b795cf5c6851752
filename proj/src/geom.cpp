#include "syrof/geom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <tuple>

namespace syrof::geom {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<PointSet::Point> canonical(const PointSet& ps) {
  std::vector<PointSet::Point> pts = ps.points;
  for (const auto& p : pts)
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw Error(Errc::non_finite, "point coordinates");
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    if (a.x != b.x) return a.x < b.x;
    if (a.y != b.y) return a.y < b.y;
    return a.id < b.id;
  });
  for (size_t i = 1; i < pts.size(); ++i)
    if (pts[i].id == pts[i - 1].id) throw Error(Errc::invalid_id, "duplicate point id");
  return pts;
}

double dist2(const PointSet::Point& a, const PointSet::Point& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

bool circle_contains(const Circle& c, const PointSet::Point& p) {
  const double dx = p.x - c.cx, dy = p.y - c.cy;
  const double slack = 1e-12 * std::max(1.0, c.radius * c.radius);
  return dx * dx + dy * dy <= c.radius * c.radius + slack;
}

Circle circle_from_2(const PointSet::Point& a, const PointSet::Point& b) {
  Circle c;
  c.cx = (a.x + b.x) / 2.0;
  c.cy = (a.y + b.y) / 2.0;
  c.radius = std::sqrt(dist2(a, b)) / 2.0;
  return c;
}

Circle circle_from_3(const PointSet::Point& a, const PointSet::Point& b, const PointSet::Point& p) {
  const double bx = b.x - a.x, by = b.y - a.y;
  const double cx = p.x - a.x, cy = p.y - a.y;
  const double d = 2.0 * (bx * cy - by * cx);
  if (std::fabs(d) < 1e-14) {
    // collinear triple: diametral circle of the farthest pair
    Circle best = circle_from_2(a, b);
    if (Circle c2 = circle_from_2(a, p); c2.radius > best.radius) best = c2;
    if (Circle c2 = circle_from_2(b, p); c2.radius > best.radius) best = c2;
    return best;
  }
  const double b2 = bx * bx + by * by;
  const double c2 = cx * cx + cy * cy;
  const double ux = (cy * b2 - by * c2) / d;
  const double uy = (bx * c2 - cx * b2) / d;
  Circle c;
  c.cx = a.x + ux;
  c.cy = a.y + uy;
  c.radius = std::hypot(ux, uy);
  return c;
}

double cross(const PointSet::Point& o, const PointSet::Point& a, const PointSet::Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

/// Kuhn's augmenting-path matching over the edges allowed[i][j]; returns the
/// robot->target assignment or empty if no perfect matching exists.
std::vector<int> perfect_matching(const std::vector<std::vector<bool>>& allowed) {
  const int n = static_cast<int>(allowed.size());
  std::vector<int> target_of(n, -1), robot_of(n, -1);
  std::vector<char> visited(n);
  auto augment = [&](auto&& self, int r) -> bool {
    for (int t = 0; t < n; ++t) {
      if (!allowed[r][t] || visited[t]) continue;
      visited[t] = 1;
      if (robot_of[t] == -1 || self(self, robot_of[t])) {
        robot_of[t] = r;
        target_of[r] = t;
        return true;
      }
    }
    return false;
  };
  for (int r = 0; r < n; ++r) {
    std::fill(visited.begin(), visited.end(), 0);
    if (!augment(augment, r)) return {};
  }
  return target_of;
}

/// Hungarian algorithm (potentials form). cost entries may be kInf (forbidden).
/// Returns min total cost and the assignment, or nullopt when no finite
/// perfect assignment exists.
struct HungarianResult {
  double cost = 0;
  std::vector<int> target_of;
};
std::optional<HungarianResult> hungarian(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  std::vector<double> u(n + 1, 0), v(n + 1, 0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = -1;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      if (!(delta < kInf)) return std::nullopt;  // remaining edges all forbidden
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  HungarianResult res;
  res.target_of.assign(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] != 0) res.target_of[p[j] - 1] = j - 1;
  for (int i = 0; i < n; ++i) {
    if (!(cost[i][res.target_of[i]] < kInf)) return std::nullopt;
    res.cost += cost[i][res.target_of[i]];
  }
  return res;
}

}  // namespace

int number_of_members(const vm::Ldmap& map) { return static_cast<int>(map.entries.size()); }

uint8_t leader(const vm::Ldmap& map) {
  if (map.entries.empty()) throw Error(Errc::empty_map, "leader of empty map");
  uint8_t best = map.entries.front().id;
  for (const auto& e : map.entries) best = std::min(best, e.id);
  return best;
}

PointSet points_from_ldmap(const vm::Ldmap& map) {
  PointSet ps;
  ps.points.reserve(map.entries.size());
  for (const auto& e : map.entries) ps.points.push_back({e.id, e.x, e.y});
  return ps;
}

Circle smallest_enclosing_circle(const PointSet& ps) {
  auto pts = canonical(ps);
  if (pts.empty()) throw Error(Errc::empty_set, "smallest_enclosing_circle of empty set");
  Circle c{pts[0].x, pts[0].y, 0.0};
  for (size_t i = 1; i < pts.size(); ++i) {
    if (circle_contains(c, pts[i])) continue;
    c = Circle{pts[i].x, pts[i].y, 0.0};
    for (size_t j = 0; j < i; ++j) {
      if (circle_contains(c, pts[j])) continue;
      c = circle_from_2(pts[i], pts[j]);
      for (size_t k = 0; k < j; ++k) {
        if (circle_contains(c, pts[k])) continue;
        c = circle_from_3(pts[i], pts[j], pts[k]);
      }
    }
  }
  return c;
}

std::vector<uint8_t> convex_hull(const PointSet& ps) {
  auto pts = canonical(ps);
  if (pts.empty()) throw Error(Errc::empty_set, "convex_hull of empty set");
  // coincident points: keep the smallest id (canonical order puts it first)
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const auto& a, const auto& b) { return a.x == b.x && a.y == b.y; }),
            pts.end());
  const size_t n = pts.size();
  std::vector<PointSet::Point> hull;
  if (n == 1) {
    hull = pts;
  } else {
    hull.resize(2 * n);
    size_t k = 0;
    for (size_t i = 0; i < n; ++i) {  // lower hull
      while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
      hull[k++] = pts[i];
    }
    const size_t lower = k + 1;
    for (size_t i = n - 1; i-- > 0;) {  // upper hull
      while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
      hull[k++] = pts[i];
    }
    hull.resize(k - 1);  // last point repeats the first
  }
  // rotate so the lowest-then-leftmost vertex comes first
  size_t start = 0;
  for (size_t i = 1; i < hull.size(); ++i) {
    if (hull[i].y < hull[start].y || (hull[i].y == hull[start].y && hull[i].x < hull[start].x)) start = i;
  }
  std::vector<uint8_t> ids;
  ids.reserve(hull.size());
  for (size_t i = 0; i < hull.size(); ++i) ids.push_back(hull[(start + i) % hull.size()].id);
  return ids;
}

Matching min_weighted_matching(const PointSet& robots, const PointSet& targets, MatchObjective objective) {
  if (robots.points.size() != targets.points.size())
    throw Error(Errc::size_mismatch, "robots and targets differ in size");
  auto rs = canonical(robots);
  auto ts = canonical(targets);
  std::sort(rs.begin(), rs.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  std::sort(ts.begin(), ts.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  const int n = static_cast<int>(rs.size());
  Matching out;
  if (n == 0) return out;

  std::vector<std::vector<double>> d(n, std::vector<double>(n));
  std::vector<double> weights;
  weights.reserve(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      d[i][j] = std::sqrt(dist2({rs[i].id, rs[i].x, rs[i].y}, {ts[j].id, ts[j].x, ts[j].y}));
      weights.push_back(d[i][j]);
    }

  // cap = the bottleneck value to honor (min-sum mode allows everything)
  double cap = kInf;
  if (objective == MatchObjective::kBottleneck) {
    std::sort(weights.begin(), weights.end());
    weights.erase(std::unique(weights.begin(), weights.end()), weights.end());
    size_t lo = 0, hi = weights.size() - 1;
    auto feasible = [&](double w) {
      std::vector<std::vector<bool>> allowed(n, std::vector<bool>(n));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) allowed[i][j] = d[i][j] <= w;
      return !perfect_matching(allowed).empty();
    };
    while (lo < hi) {
      const size_t mid = (lo + hi) / 2;
      if (feasible(weights[mid]))
        hi = mid;
      else
        lo = mid + 1;
    }
    cap = weights[lo];
  }

  auto capped_cost = [&](const std::vector<char>& robot_done, const std::vector<char>& target_taken) {
    std::vector<std::vector<double>> cost;
    std::vector<int> rid, tid;
    for (int i = 0; i < n; ++i)
      if (!robot_done[i]) rid.push_back(i);
    for (int j = 0; j < n; ++j)
      if (!target_taken[j]) tid.push_back(j);
    cost.resize(rid.size(), std::vector<double>(tid.size()));
    for (size_t a = 0; a < rid.size(); ++a)
      for (size_t b = 0; b < tid.size(); ++b)
        cost[a][b] = d[rid[a]][tid[b]] <= cap ? d[rid[a]][tid[b]] : kInf;
    return std::tuple{cost, rid, tid};
  };

  std::vector<char> robot_done(n, 0), target_taken(n, 0);
  auto [cost0, rid0, tid0] = capped_cost(robot_done, target_taken);
  auto base = hungarian(cost0);
  if (!base) throw Error(Errc::size_mismatch, "no feasible assignment");  // unreachable with finite inputs
  const double best_total = base->cost;
  const double sum_slack = 1e-9 * (1.0 + std::fabs(best_total));

  // lexicographically smallest assignment (by robot id, then target id) among
  // those achieving the bottleneck cap and the minimal total
  double fixed_cost = 0;
  out.pairs.reserve(n);
  for (int i = 0; i < n; ++i) {
    bool placed = false;
    for (int j = 0; j < n && !placed; ++j) {
      if (target_taken[j] || d[i][j] > cap) continue;
      robot_done[i] = 1;
      target_taken[j] = 1;
      if (i == n - 1) {
        if (fixed_cost + d[i][j] <= best_total + sum_slack) placed = true;
      } else {
        auto [cost, rid, tid] = capped_cost(robot_done, target_taken);
        if (auto rest = hungarian(cost); rest && fixed_cost + d[i][j] + rest->cost <= best_total + sum_slack)
          placed = true;
      }
      if (placed) {
        fixed_cost += d[i][j];
        out.pairs.emplace_back(rs[i].id, ts[j].id);
        out.bottleneck = std::max(out.bottleneck, d[i][j]);
      } else {
        robot_done[i] = 0;
        target_taken[j] = 0;
      }
    }
    if (!placed) throw Error(Errc::size_mismatch, "assignment construction failed");  // unreachable
  }
  out.total = fixed_cost;
  return out;
}

}  // namespace syrof::geom
