#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hjplace/errors.hpp"
#include "hjplace/geometry.hpp"
#include "hjplace/scene.hpp"
#include "hjplace/solver.hpp"
#include "hjplace/windfield.hpp"

namespace hjplace {

/// Adversary trajectory, start first.
struct Path {
  std::vector<Vec2> points;
  /// One flag per segment, set by annotate_visibility.
  std::vector<std::uint8_t> in_scope;
  /// Travel time (upwind) or weighted cost (graph) from start to destination.
  double total_time = 0.0;
  double visible_fraction = 0.0;

  std::size_t segments() const { return points.empty() ? 0 : points.size() - 1; }

  double segment_length(std::size_t i) const { return distance(points[i], points[i + 1]); }

  double length() const {
    double total = 0.0;
    for (std::size_t i = 0; i < segments(); ++i) total += segment_length(i);
    return total;
  }

  std::size_t in_scope_segments() const {
    return static_cast<std::size_t>(std::count(in_scope.begin(), in_scope.end(), 1));
  }
};

/// Characteristic descent stalled; carries whatever was traced so far.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, Path partial)
      : Error(what), partial_(std::move(partial)) {}
  const Path& partial() const { return partial_; }

 private:
  Path partial_;
};

namespace detail {

inline Vec2 node_gradient(const ValueField& f, std::int32_t ix, std::int32_t iy) {
  const auto& g = f.grid;
  const double uc = f.u[g.index(ix, iy)];
  const auto value = [&](std::int32_t i, std::int32_t j) {
    return g.inside(i, j) ? f.u[g.index(i, j)] : kInfinity;
  };
  const auto partial = [&](double lo, double hi) {
    const bool has_lo = std::isfinite(lo);
    const bool has_hi = std::isfinite(hi);
    if (has_lo && has_hi) return (hi - lo) / (2.0 * g.h);
    if (has_hi) return (hi - uc) / g.h;
    if (has_lo) return (uc - lo) / g.h;
    return 0.0;
  };
  return {partial(value(ix - 1, iy), value(ix + 1, iy)),
          partial(value(ix, iy - 1), value(ix, iy + 1))};
}

struct Sample {
  double value = kInfinity;
  Vec2 gradient{};
};

/// Bilinear blend of node values and central-difference gradients over the
/// finite corners of the cell containing `p`.
inline Sample sample_field(const ValueField& f, Vec2 p) {
  const auto& g = f.grid;
  const Vec2 q = g.to_lattice(p);
  const auto i0 = std::clamp(static_cast<std::int32_t>(std::floor(q.x)), 0, g.nx - 2);
  const auto j0 = std::clamp(static_cast<std::int32_t>(std::floor(q.y)), 0, g.ny - 2);
  const double tx = std::clamp(q.x - i0, 0.0, 1.0);
  const double ty = std::clamp(q.y - j0, 0.0, 1.0);
  const std::array<std::array<std::int32_t, 2>, 4> corners{{{0, 0}, {1, 0}, {0, 1}, {1, 1}}};
  double wsum = 0.0;
  double value = 0.0;
  Vec2 grad{};
  for (const auto& c : corners) {
    const double w = (c[0] ? tx : 1.0 - tx) * (c[1] ? ty : 1.0 - ty);
    const double u = f.u[g.index(i0 + c[0], j0 + c[1])];
    if (!std::isfinite(u) || w == 0.0) continue;
    wsum += w;
    value += w * u;
    grad = grad + w * node_gradient(f, i0 + c[0], j0 + c[1]);
  }
  if (wsum == 0.0) {
    const auto n = g.nearest(p);
    const double u = f.u[g.index(n)];
    if (!std::isfinite(u)) return {};
    return {u, node_gradient(f, n.ix, n.iy)};
  }
  return {value / wsum, grad / wsum};
}

}  // namespace detail

/// Interpolated value of `field` at an arbitrary point.
inline double interpolate_value(const ValueField& field, Vec2 p) {
  return detail::sample_field(field, p).value;
}

struct DescentOptions {
  /// Overrides the default 20·(u(start)/step)·V_a iteration budget when > 0.
  std::size_t max_steps = 0;
};

/// Forward-Euler integration of dX/dt = −V_a ∇u/‖∇u‖ + W(X) from `start`
/// until within one grid spacing of the destination. Steps that would land
/// on an obstacle cell slide along the blocked axis instead.
inline Path extract_path_characteristic(const ValueField& field, const WindField& wind,
                                        const GridWorld& world, Vec2 start, double step,
                                        const DescentOptions& options = {}) {
  const auto& g = field.grid;
  if (!(step > 0.0) || step > g.h * (1.0 + 1e-12)) {
    throw ValidationError("descent step must lie in (0, h]");
  }
  world.require_free(start, "start");
  const double u0 = field.at(start);
  if (!std::isfinite(u0)) throw UnreachableError("start cannot reach the destination");

  const bool soft = !field.speed_scale.empty();
  const double base = world.base_speed();
  const auto local = [&](Vec2 p, double& va, Vec2& w) {
    const double s = soft ? field.speed_scale[g.nearest_index(p)] : 1.0;
    va = base * s;
    w = s * wind.sample(p);
  };
  const auto passable = [&](Vec2 p) {
    return world.scene().region.contains(p) && (soft || !world.obstacles().blocked_at(p));
  };

  const Vec2 dest = field.destination_point();
  Path path;
  path.points.push_back(start);
  if (distance(start, dest) <= 1e-12) return path;

  const std::size_t budget =
      options.max_steps > 0
          ? options.max_steps
          : static_cast<std::size_t>(std::ceil(20.0 * (u0 / step) * base)) + 1;
  double time = 0.0;
  for (std::size_t k = 0; k < budget; ++k) {
    const Vec2 p = path.points.back();
    double va;
    Vec2 w;
    local(p, va, w);
    const double to_dest = distance(p, dest);
    if (to_dest <= g.h * (1.0 + 1e-12)) {
      if (to_dest > 0.0) {
        time += to_dest / ray_speed((dest - p) / to_dest, w, va);
        path.points.push_back(dest);
      }
      path.total_time = time;
      return path;
    }

    const auto here = detail::sample_field(field, p);
    const double gn = norm(here.gradient);
    if (!(gn > 0.0)) {
      path.total_time = time;
      throw NonConvergenceError("value gradient vanished during descent", std::move(path));
    }
    const Vec2 motion = -va * here.gradient / gn + w;
    Vec2 next = p + step * normalized(motion);
    double speed = norm(motion);

    if (!passable(next)) {
      // slide along whichever axis still descends
      bool moved = false;
      double best = here.value;
      const std::array<Vec2, 2> axes{Vec2{motion.x >= 0.0 ? 1.0 : -1.0, 0.0},
                                     Vec2{0.0, motion.y >= 0.0 ? 1.0 : -1.0}};
      for (const auto& e : axes) {
        const Vec2 cand = p + step * e;
        if (!passable(cand)) continue;
        const double uc = interpolate_value(field, cand);
        if (uc < best) {
          best = uc;
          next = cand;
          speed = ray_speed(e, w, va);
          moved = true;
        }
      }
      if (!moved) {
        path.total_time = time;
        throw NonConvergenceError("descent blocked by an obstacle", std::move(path));
      }
    }
    time += step / speed;
    path.points.push_back(next);
  }
  path.total_time = time;
  std::ostringstream ss;
  ss << "descent did not reach the destination within " << budget << " steps";
  throw NonConvergenceError(ss.str(), std::move(path));
}

/// Follows graph predecessors from the node of `start` to the destination.
/// total_time is the edge-cost sum accumulated from the destination end, which
/// reproduces u(start) exactly.
inline Path extract_path_discrete(const ValueField& field, Vec2 start) {
  if (field.mode != SolverMode::Dijkstra || field.edge_cost.empty()) {
    throw ValidationError("discrete path extraction needs a graph-mode value field");
  }
  const auto& g = field.grid;
  std::size_t idx = g.nearest_index(start);
  if (!std::isfinite(field.u[idx])) throw UnreachableError("start cannot reach the destination");

  std::vector<std::size_t> chain{idx};
  while (idx != field.destination) {
    const auto p = field.pred_j[idx];
    if (p < 0) throw UnreachableError("broken predecessor chain");
    idx = static_cast<std::size_t>(p);
    chain.push_back(idx);
  }
  Path path;
  path.points.reserve(chain.size());
  for (const auto i : chain) path.points.push_back(g.position(i));
  double acc = 0.0;
  for (std::size_t i = chain.size() - 1; i-- > 0;) acc += field.edge_cost[chain[i]];
  path.total_time = acc;
  return path;
}

/// Flags each segment by whether its midpoint is seen by any camera.
inline Path annotate_visibility(Path path, const GridWorld& world) {
  const std::size_t m = path.segments();
  path.in_scope.assign(m, 0);
  double total = 0.0;
  double seen = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double len = path.segment_length(i);
    const bool v = world.visible((path.points[i] + path.points[i + 1]) / 2.0);
    path.in_scope[i] = v ? 1 : 0;
    total += len;
    if (v) seen += len;
  }
  path.visible_fraction = total > 0.0 ? seen / total : 0.0;
  return path;
}

namespace detail {

inline bool unseen_straight(const GridWorld& world, Vec2 a, Vec2 b) {
  if (!line_of_sight(world.obstacles(), a, b)) return false;
  const double len = distance(a, b);
  const auto samples = static_cast<std::size_t>(std::ceil(4.0 * len / world.grid().h)) + 1;
  for (std::size_t s = 0; s <= samples; ++s) {
    const double t = static_cast<double>(s) / static_cast<double>(samples);
    const Vec2 p = a + t * (b - a);
    if (world.obstacles().blocked_at(p) || world.visible(p)) return false;
  }
  return true;
}

}  // namespace detail

/// Greedy shortcutting: replaces sub-chains by straight segments that cross no
/// obstacle and no camera scope. total_time becomes Σ len·(1 + η·in_scope).
inline Path smooth_path(const Path& path, const GridWorld& world, double eta) {
  if (path.points.size() < 3) return annotate_visibility(path, world);
  Path out;
  std::size_t i = 0;
  out.points.push_back(path.points.front());
  while (i + 1 < path.points.size()) {
    std::size_t j = path.points.size() - 1;
    while (j > i + 1 && !detail::unseen_straight(world, path.points[i], path.points[j])) --j;
    out.points.push_back(path.points[j]);
    i = j;
  }
  out = annotate_visibility(std::move(out), world);
  double cost = 0.0;
  for (std::size_t s = 0; s < out.segments(); ++s) {
    cost += out.segment_length(s) * (1.0 + eta * out.in_scope[s]);
  }
  out.total_time = cost;
  return out;
}

}  // namespace hjplace
