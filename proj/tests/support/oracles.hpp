#pragma once

// Brute-force reference implementations used only by the tests. Each one takes
// a deliberately different route from the library code it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "hjplace/geometry.hpp"
#include "hjplace/grid.hpp"
#include "hjplace/scene.hpp"

namespace hjplace::oracle {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Liang–Barsky clip of segment [a, b] against the closed square of cell c,
/// expanded by the touch tolerance, in lattice units.
inline bool segment_touches_cell(const GridSpec& g, Vec2 a, Vec2 b, GridIndex c) {
  const Vec2 p = g.to_lattice(a);
  const Vec2 q = g.to_lattice(b);
  const double tol = kTouchTolerance;
  const double lo[2] = {c.ix - 0.5 - tol, c.iy - 0.5 - tol};
  const double hi[2] = {c.ix + 0.5 + tol, c.iy + 0.5 + tol};
  const double s[2] = {p.x, p.y};
  const double d[2] = {q.x - p.x, q.y - p.y};
  double t0 = 0.0;
  double t1 = 1.0;
  for (int k = 0; k < 2; ++k) {
    if (d[k] == 0.0) {
      if (s[k] < lo[k] || s[k] > hi[k]) return false;
      continue;
    }
    double ta = (lo[k] - s[k]) / d[k];
    double tb = (hi[k] - s[k]) / d[k];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1 + 1e-12) return false;
  }
  return true;
}

inline bool cell_contains(const GridSpec& g, GridIndex c, Vec2 p) {
  const Vec2 q = g.to_lattice(p);
  return std::abs(q.x - c.ix) <= 0.5 + kTouchTolerance && std::abs(q.y - c.iy) <= 0.5 + kTouchTolerance;
}

/// Occlusion by scanning every obstacle cell of the raster.
inline bool line_of_sight(const ObstacleRaster& r, Vec2 a, Vec2 b) {
  const auto& g = r.grid();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!r.blocked(i)) continue;
    const GridIndex c = g.coords(i);
    if (cell_contains(g, c, a) || cell_contains(g, c, b)) continue;
    if (segment_touches_cell(g, a, b, c)) return false;
  }
  return true;
}

/// Compass bearing via acos instead of atan2.
inline double bearing(Vec2 from, Vec2 to) {
  const Vec2 d = to - from;
  const double r = std::hypot(d.x, d.y);
  if (r == 0.0) return 0.0;
  const double a = std::acos(std::clamp(d.y / r, -1.0, 1.0));
  return d.x >= 0.0 ? a : kTwoPi - a;
}

inline bool in_scope(const Camera& cam, Vec2 p, const ObstacleRaster& r) {
  if (r.blocked(r.grid().nearest_index(p))) return false;
  if (std::hypot(p.x - cam.position.x, p.y - cam.position.y) <= 1e-12) return true;
  if (cam.opening < kTwoPi) {
    double off = bearing(cam.position, p) - cam.beta;
    while (off < 0.0) off += kTwoPi;
    while (off >= kTwoPi) off -= kTwoPi;
    const bool inside = off <= cam.opening + 1e-9 || off >= kTwoPi - 1e-9;
    if (!inside) return false;
  }
  return oracle::line_of_sight(r, cam.position, p);
}

inline bool visible(const std::vector<Camera>& cams, Vec2 p, const ObstacleRaster& r) {
  for (const auto& c : cams) {
    if (oracle::in_scope(c, p, r)) return true;
  }
  return false;
}

/// Single-source shortest paths on the 4-connected grid by Bellman–Ford, with
/// edge weights from the brute-force scope test.
inline std::vector<double> bellman_ford(const GridWorld& w, Vec2 dest, double eta) {
  const auto& g = w.grid();
  const std::size_t n = g.size();
  struct Edge {
    std::size_t a, b;
    double cost;
  };
  std::vector<Edge> edges;
  for (std::int32_t j = 0; j < g.ny; ++j) {
    for (std::int32_t i = 0; i < g.nx; ++i) {
      const std::size_t a = g.index(i, j);
      if (w.blocked(a)) continue;
      const std::int32_t nbr[2][2] = {{i + 1, j}, {i, j + 1}};
      for (const auto& nb : nbr) {
        if (!g.inside(nb[0], nb[1])) continue;
        const std::size_t b = g.index(nb[0], nb[1]);
        if (w.blocked(b)) continue;
        const Vec2 mid = (g.position(a) + g.position(b)) / 2.0;
        const bool seen = visible(w.cameras(), mid, w.obstacles());
        edges.push_back({a, b, g.h * (1.0 + (seen ? eta : 0.0))});
      }
    }
  }
  std::vector<double> dist(n, kInf);
  dist[g.nearest_index(dest)] = 0.0;
  for (std::size_t round = 0; round < n; ++round) {
    bool changed = false;
    for (const auto& e : edges) {
      if (dist[e.a] + e.cost < dist[e.b] - 1e-12) {
        dist[e.b] = dist[e.a] + e.cost;
        changed = true;
      }
      if (dist[e.b] + e.cost < dist[e.a] - 1e-12) {
        dist[e.a] = dist[e.b] + e.cost;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return dist;
}

/// Semi-Lagrangian simplex value in a uniform wind: minimum over `samples`
/// aim points q on [xj, xk] of travel time x→q plus the linear interpolant.
inline double semi_lagrangian_update(Vec2 x, Vec2 xj, Vec2 xk, double uj, double uk, Vec2 wind,
                                     double va, int samples) {
  double best = kInf;
  for (int s = 0; s <= samples; ++s) {
    const double t = static_cast<double>(s) / samples;
    const Vec2 q = xj + t * (xk - xj);
    const Vec2 d = q - x;
    const double len = std::hypot(d.x, d.y);
    const Vec2 e = d / len;
    const double we = wind.x * e.x + wind.y * e.y;
    const double speed = we + std::sqrt(va * va - (wind.x * wind.x + wind.y * wind.y) + we * we);
    best = std::min(best, len / speed + (1.0 - t) * uj + t * uk);
  }
  return best;
}

/// Visits every simple 4-connected path between two nodes on free cells.
inline void enumerate_simple_paths(const GridWorld& w, std::size_t from, std::size_t to,
                                   const std::function<void(const std::vector<std::size_t>&)>& visit) {
  const auto& g = w.grid();
  std::vector<std::uint8_t> used(g.size(), 0);
  std::vector<std::size_t> stack{from};
  used[from] = 1;
  std::function<void(std::size_t)> dfs = [&](std::size_t at) {
    if (at == to) {
      visit(stack);
      return;
    }
    const GridIndex c = g.coords(at);
    const std::int32_t nb[4][2] = {{c.ix + 1, c.iy}, {c.ix - 1, c.iy}, {c.ix, c.iy + 1}, {c.ix, c.iy - 1}};
    for (const auto& n : nb) {
      if (!g.inside(n[0], n[1])) continue;
      const std::size_t k = g.index(n[0], n[1]);
      if (used[k] || w.blocked(k)) continue;
      used[k] = 1;
      stack.push_back(k);
      dfs(k);
      stack.pop_back();
      used[k] = 0;
    }
  };
  dfs(from);
}

}  // namespace hjplace::oracle
