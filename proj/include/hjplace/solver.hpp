#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

#include "hjplace/errors.hpp"
#include "hjplace/geometry.hpp"
#include "hjplace/grid.hpp"
#include "hjplace/scene.hpp"
#include "hjplace/windfield.hpp"

namespace hjplace {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class SolverMode { Dijkstra, Upwind };

/// How the upwind solver treats obstacle cells.
enum class ObstacleMode {
  Delete,    ///< obstacle nodes removed from the mesh
  SlowDown,  ///< obstacle nodes kept, front speed scaled by (1 − ξ)
};

enum class NodeState : std::uint8_t { Far, Considered, Accepted };

/// Minimum time (upwind) or minimum weighted length (Dijkstra) to the
/// destination, for every node.
struct ValueField {
  GridSpec grid{};
  SolverMode mode = SolverMode::Dijkstra;
  std::vector<double> u;
  std::vector<NodeState> state;
  /// Nodes the final value was computed from; pred_k is -1 for edge
  /// (one-sided / graph) updates and both are -1 at the destination.
  std::vector<std::int32_t> pred_j;
  std::vector<std::int32_t> pred_k;
  /// Dijkstra only: weight of the edge to pred_j.
  std::vector<double> edge_cost;
  /// Upwind SlowDown mode only: 1 − ξ per node.
  std::vector<double> speed_scale;
  /// Node indices in acceptance order.
  std::vector<std::int32_t> acceptance_order;
  std::size_t destination = 0;
  double eta = 0.0;
  /// Anisotropy ratio max (V_a + |W|)/(V_a − |W|) seen by the upwind solver.
  double anisotropy = 1.0;
  double stencil_radius = 0.0;

  double value(std::size_t idx) const { return u[idx]; }
  bool reachable(std::size_t idx) const { return std::isfinite(u[idx]); }
  /// Value at the node whose cell contains `p`.
  double at(Vec2 p) const { return u[grid.nearest_index(p)]; }
  Vec2 destination_point() const { return grid.position(destination); }
};

// Local updates

/// Front speed in normal direction `n`: V_a − ⟨n, W⟩.
inline double front_speed(Vec2 n, Vec2 wind, double va) { return va - dot(n, wind); }

/// Ground speed achievable along unit direction `e` when |W| < V_a.
inline double ray_speed(Vec2 e, Vec2 wind, double va) {
  const double we = dot(wind, e);
  return we + std::sqrt(va * va - dot(wind, wind) + we * we);
}

/// One-sided update: travel straight from X to Xj, then follow u from there.
inline double edge_update(Vec2 x, Vec2 xj, double uj, Vec2 wind, double va) {
  if (!std::isfinite(uj)) return kInfinity;
  const Vec2 e = xj - x;
  const double len = norm(e);
  return uj + len / ray_speed(e / len, wind, va);
}

struct SimplexUpdate {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double value = kInfinity;
  bool characteristic_inside = false;
  /// Real root, causal, non-spurious and characteristic inside the simplex.
  bool valid = false;
};

inline constexpr double kConeTolerance = 1e-9;

/// Solves the discretized HJ equation on the simplex (X, Xj, Xk) for u(X).
/// The gradient is ∇u ≈ P⁻¹(α v + β) with P = [Xj − X; Xk − X], α = (−1, −1)
/// and β = (uj, uk); the larger root of A v² + B v + C = 0 is kept. When only
/// one neighbour value is finite the update degenerates to an edge update.
inline SimplexUpdate simplex_update(Vec2 x, Vec2 xj, Vec2 xk, double uj, double uk, Vec2 wind,
                                    double va) {
  SimplexUpdate r;
  const bool fj = std::isfinite(uj);
  const bool fk = std::isfinite(uk);
  if (!fj && !fk) return r;
  if (!fj || !fk) {
    r.value = fj ? edge_update(x, xj, uj, wind, va) : edge_update(x, xk, uk, wind, va);
    r.characteristic_inside = true;
    r.valid = true;
    return r;
  }

  const Vec2 ej = xj - x;
  const Vec2 ek = xk - x;
  const double det = cross(ej, ek);
  if (std::abs(det) <= 1e-12 * norm(ej) * norm(ek)) return r;

  // rows of P⁻¹ applied to a vector (s, t)
  const auto solve = [&](double s, double t) -> Vec2 {
    return {(ek.y * s - ej.y * t) / det, (-ek.x * s + ej.x * t) / det};
  };
  const Vec2 pa = solve(-1.0, -1.0);
  const Vec2 pb = solve(uj, uk);
  const double va2 = va * va;
  const double aw = dot(pa, wind);
  const double bw = dot(pb, wind) + 1.0;
  r.a = va2 * dot(pa, pa) - aw * aw;
  r.b = 2.0 * va2 * dot(pa, pb) - 2.0 * aw * bw;
  r.c = va2 * dot(pb, pb) - bw * bw;

  const double disc = r.b * r.b - 4.0 * r.a * r.c;
  if (disc < 0.0 || !(r.a > 0.0)) return r;
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (r.b + std::copysign(sq, r.b));
  double v = q / r.a;
  if (q != 0.0) v = std::max(v, r.c / q);
  r.value = v;

  const Vec2 grad = pa * v + pb;
  const double gn = norm(grad);
  if (!(gn > 0.0)) return r;
  // squaring admits a root with V_a‖∇u‖ = −(1 + ⟨∇u, W⟩)
  if (1.0 + dot(grad, wind) <= 0.0) return r;

  // motion direction −V_a ∇u/‖∇u‖ + W must point into the cone of the edges
  const Vec2 d = normalized(-va * grad / gn + wind);
  const Vec2 uj_dir = normalized(ej);
  const Vec2 uk_dir = normalized(ek);
  const double cdet = cross(uj_dir, uk_dir);
  const double lj = cross(d, uk_dir) / cdet;
  const double lk = cross(uj_dir, d) / cdet;
  r.characteristic_inside = lj >= -kConeTolerance && lk >= -kConeTolerance;
  r.valid = r.characteristic_inside && v > std::max(uj, uk);
  return r;
}

// Obstacle slowdown

/// (1 − ξ)·F; ξ must lie in [0, ξ_max] with ξ_max < 1.
inline double obstacle_speed_scaling(double speed, double xi, double xi_max) {
  if (!(xi_max >= 0.0 && xi_max < 1.0)) {
    throw ConfigurationError("xi_max must lie in [0, 1) to keep the front speed positive");
  }
  if (!(xi >= 0.0 && xi <= xi_max)) throw ConfigurationError("xi outside [0, xi_max]");
  return (1.0 - xi) * speed;
}

/// ξ map of an obstacle raster: ξ_max on obstacle cells, 0 elsewhere.
inline std::vector<double> obstacle_xi_map(const ObstacleRaster& raster, double xi_max) {
  if (!(xi_max >= 0.0 && xi_max < 1.0)) {
    throw ConfigurationError("xi_max must lie in [0, 1) to keep the front speed positive");
  }
  std::vector<double> xi(raster.grid().size(), 0.0);
  for (std::size_t i = 0; i < xi.size(); ++i) {
    if (raster.blocked(i)) xi[i] = xi_max;
  }
  return xi;
}

// Ordered upwind solver

struct UpwindOptions {
  ObstacleMode obstacle_mode = ObstacleMode::Delete;
  double xi_max = 0.99;
  /// Upper bound on the stencil radius in grid spacings; 0 means the full
  /// anisotropy-derived radius.
  double max_stencil_cells = 0.0;
};

namespace detail {

struct Offset {
  std::int32_t dx;
  std::int32_t dy;
};

// cells split along the (+1, +1) diagonal
inline constexpr std::array<Offset, 6> kMeshNeighbours{
    {{1, 0}, {0, 1}, {-1, 0}, {0, -1}, {1, 1}, {-1, -1}}};

inline constexpr std::array<Offset, 4> kGridNeighbours{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};

using HeapEntry = std::pair<double, std::int32_t>;
using MinHeap = std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>>;

class OrderedUpwindSolver {
 public:
  OrderedUpwindSolver(const GridWorld& world, const WindField& wind, const UpwindOptions& options)
      : world_(world), wind_(wind), options_(options), grid_(world.grid()) {}

  ValueField run(Vec2 destination) {
    world_.require_free(destination, "destination");
    if (wind_.grid().nx != grid_.nx || wind_.grid().ny != grid_.ny) {
      throw ValidationError("wind field grid does not match the scene grid");
    }
    const std::size_t n = grid_.size();
    const bool soft = options_.obstacle_mode == ObstacleMode::SlowDown;

    field_.grid = grid_;
    field_.mode = SolverMode::Upwind;
    field_.u.assign(n, kInfinity);
    field_.state.assign(n, NodeState::Far);
    field_.pred_j.assign(n, -1);
    field_.pred_k.assign(n, -1);
    field_.destination = grid_.nearest_index(destination);

    active_.assign(n, 1);
    va_.assign(n, world_.base_speed());
    w_.assign(wind_.vectors().begin(), wind_.vectors().end());
    if (soft) {
      const auto xi = obstacle_xi_map(world_.obstacles(), options_.xi_max);
      field_.speed_scale.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double s = obstacle_speed_scaling(1.0, xi[i], options_.xi_max);
        field_.speed_scale[i] = s;
        va_[i] *= s;
        w_[i] = s * w_[i];
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) active_[i] = world_.blocked(i) ? 0 : 1;
    }
    check_los_ = !soft && !world_.obstacles().empty();

    double gamma = 1.0;
    const double va = world_.base_speed();
    for (std::size_t i = 0; i < n; ++i) {
      if (!active_[i]) continue;
      const double m = norm(wind_.at(i));
      if (m >= va) throw ValidationError("wind magnitude reaches the base speed");
      gamma = std::max(gamma, (va + m) / (va - m));
    }
    field_.anisotropy = gamma;
    double radius = gamma * std::sqrt(2.0);
    if (options_.max_stencil_cells > 0.0) radius = std::min(radius, options_.max_stencil_cells);
    radius = std::max(radius, std::sqrt(2.0));
    field_.stencil_radius = radius * grid_.h;
    build_disc(radius);

    open_.assign(n, 0);
    const auto dest = static_cast<std::int32_t>(field_.destination);
    field_.u[dest] = 0.0;
    heap_.emplace(0.0, dest);

    while (!heap_.empty()) {
      const auto [value, idx] = heap_.top();
      heap_.pop();
      if (field_.state[idx] == NodeState::Accepted || value != field_.u[idx]) continue;
      accept(idx);
    }
    return std::move(field_);
  }

 private:
  void build_disc(double radius) {
    const auto r = static_cast<std::int32_t>(std::floor(radius + 1e-9));
    disc_.clear();
    for (std::int32_t dy = -r; dy <= r; ++dy) {
      for (std::int32_t dx = -r; dx <= r; ++dx) {
        if (dx == 0 && dy == 0) continue;
        if (dx * dx + dy * dy <= radius * radius + 1e-9) disc_.push_back({dx, dy});
      }
    }
  }

  bool node(std::int32_t ix, std::int32_t iy, std::size_t& out) const {
    if (!grid_.inside(ix, iy)) return false;
    out = grid_.index(ix, iy);
    return active_[out] != 0;
  }

  bool front(std::size_t idx) const {
    return field_.state[idx] == NodeState::Accepted && open_[idx] > 0;
  }

  void accept(std::int32_t y) {
    field_.state[y] = NodeState::Accepted;
    field_.acceptance_order.push_back(y);
    level_ = field_.u[y];
    const GridIndex gy = grid_.coords(y);

    std::int32_t open = 0;
    for (const auto& o : kMeshNeighbours) {
      std::size_t z;
      if (!node(gy.ix + o.dx, gy.iy + o.dy, z)) continue;
      if (field_.state[z] == NodeState::Accepted) {
        --open_[z];
      } else {
        ++open;
      }
    }
    open_[y] = open;

    fresh_.clear();
    for (const auto& o : kMeshNeighbours) {
      std::size_t x;
      if (!node(gy.ix + o.dx, gy.iy + o.dy, x)) continue;
      if (field_.state[x] != NodeState::Far) continue;
      field_.state[x] = NodeState::Considered;
      full_update(x);
      fresh_.push_back(x);
    }
    for (const auto& o : disc_) {
      std::size_t x;
      if (!node(gy.ix + o.dx, gy.iy + o.dy, x)) continue;
      if (field_.state[x] != NodeState::Considered) continue;
      if (std::find(fresh_.begin(), fresh_.end(), x) != fresh_.end()) continue;
      const double before = field_.u[x];
      updates_from(x, static_cast<std::size_t>(y));
      if (field_.u[x] < before) heap_.emplace(field_.u[x], static_cast<std::int32_t>(x));
    }
  }

  void full_update(std::size_t x) {
    const GridIndex gx = grid_.coords(x);
    for (const auto& o : disc_) {
      std::size_t y;
      if (!node(gx.ix + o.dx, gx.iy + o.dy, y)) continue;
      if (front(y)) updates_from(x, y);
    }
    if (std::isfinite(field_.u[x])) heap_.emplace(field_.u[x], static_cast<std::int32_t>(x));
  }

  bool adjacent(std::size_t a, std::size_t b) const {
    const GridIndex ga = grid_.coords(a);
    const GridIndex gb = grid_.coords(b);
    return std::abs(ga.ix - gb.ix) <= 1 && std::abs(ga.iy - gb.iy) <= 1;
  }

  bool clear(std::size_t x, std::size_t y) const {
    if (!check_los_ || adjacent(x, y)) return true;
    return line_of_sight(world_.obstacles(), grid_.position(x), grid_.position(y));
  }

  void offer(std::size_t x, double value, std::size_t j, std::int32_t k) {
    // long stencil rays see only the wind at x and can undercut the accepted level
    value = std::max(value, level_);
    if (!(value < field_.u[x])) return;
    if (!clear(x, j)) return;
    if (k >= 0 && !clear(x, static_cast<std::size_t>(k))) return;
    field_.u[x] = value;
    field_.pred_j[x] = static_cast<std::int32_t>(j);
    field_.pred_k[x] = k;
  }

  // every candidate at X that uses the front node Y
  void updates_from(std::size_t x, std::size_t y) {
    const Vec2 px = grid_.position(x);
    const Vec2 py = grid_.position(y);
    const Vec2 w = w_[x];
    const double va = va_[x];
    offer(x, edge_update(px, py, field_.u[y], w, va), y, -1);

    const GridIndex gy = grid_.coords(y);
    for (const auto& o : kMeshNeighbours) {
      std::size_t z;
      if (!node(gy.ix + o.dx, gy.iy + o.dy, z)) continue;
      if (z == x || !front(z)) continue;
      const auto s = simplex_update(px, py, grid_.position(z), field_.u[y], field_.u[z], w, va);
      if (s.valid) offer(x, s.value, y, static_cast<std::int32_t>(z));
    }
  }

  const GridWorld& world_;
  const WindField& wind_;
  UpwindOptions options_;
  GridSpec grid_;
  ValueField field_;
  std::vector<std::uint8_t> active_;
  std::vector<double> va_;
  std::vector<Vec2> w_;
  std::vector<std::int32_t> open_;
  std::vector<Offset> disc_;
  std::vector<std::size_t> fresh_;
  MinHeap heap_;
  double level_ = 0.0;
  bool check_los_ = false;
};

}  // namespace detail

/// Anisotropic minimum-time solve rooted at `destination` (u = 0 there),
/// accepting nodes in non-decreasing value order. Candidates at a node come
/// from simplices on accepted-front mesh edges within γ·√2·h, plus straight
/// edge updates from each front node in range.
inline ValueField ordered_upwind(const GridWorld& world, const WindField& wind, Vec2 destination,
                                 const UpwindOptions& options = {}) {
  return detail::OrderedUpwindSolver(world, wind, options).run(destination);
}

// Graph mode

/// In-scope flags of the 4-connected edges, tested at edge midpoints.
/// horizontal[index(i, j)] is edge (i, j)–(i+1, j); vertical[index(i, j)] is
/// edge (i, j)–(i, j+1).
struct EdgeScope {
  std::vector<std::uint8_t> horizontal;
  std::vector<std::uint8_t> vertical;

  bool between(const GridSpec& grid, std::size_t a, std::size_t b) const {
    const auto ga = grid.coords(a);
    const auto gb = grid.coords(b);
    if (ga.iy == gb.iy) return horizontal[grid.index(std::min(ga.ix, gb.ix), ga.iy)] != 0;
    return vertical[grid.index(ga.ix, std::min(ga.iy, gb.iy))] != 0;
  }
};

inline EdgeScope edge_scope(const GridWorld& world) {
  const auto& g = world.grid();
  EdgeScope s{std::vector<std::uint8_t>(g.size(), 0), std::vector<std::uint8_t>(g.size(), 0)};
  if (world.cameras().empty()) return s;
  for (std::int32_t j = 0; j < g.ny; ++j) {
    for (std::int32_t i = 0; i < g.nx; ++i) {
      const Vec2 p = g.position(i, j);
      if (i + 1 < g.nx) {
        s.horizontal[g.index(i, j)] = world.visible((p + g.position(i + 1, j)) / 2.0) ? 1 : 0;
      }
      if (j + 1 < g.ny) {
        s.vertical[g.index(i, j)] = world.visible((p + g.position(i, j + 1)) / 2.0) ? 1 : 0;
      }
    }
  }
  return s;
}

/// 4-connected shortest-path tree rooted at `destination`; each edge costs
/// h·(1 + η·[midpoint in some scope]) and obstacle nodes are removed.
inline ValueField grid_dijkstra(const GridWorld& world, Vec2 destination, double eta) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ValidationError("eta must be non-negative");
  world.require_free(destination, "destination");
  const auto& g = world.grid();
  const std::size_t n = g.size();
  const EdgeScope scope = edge_scope(world);

  ValueField f;
  f.grid = g;
  f.mode = SolverMode::Dijkstra;
  f.eta = eta;
  f.u.assign(n, kInfinity);
  f.state.assign(n, NodeState::Far);
  f.pred_j.assign(n, -1);
  f.pred_k.assign(n, -1);
  f.edge_cost.assign(n, 0.0);
  f.destination = g.nearest_index(destination);

  const double plain = g.h;
  const double seen = g.h * (1.0 + eta);
  detail::MinHeap heap;
  f.u[f.destination] = 0.0;
  f.state[f.destination] = NodeState::Considered;
  heap.emplace(0.0, static_cast<std::int32_t>(f.destination));
  while (!heap.empty()) {
    const auto [value, idx] = heap.top();
    heap.pop();
    if (f.state[idx] == NodeState::Accepted || value != f.u[idx]) continue;
    f.state[idx] = NodeState::Accepted;
    f.acceptance_order.push_back(idx);
    const auto gi = g.coords(idx);
    for (const auto& o : detail::kGridNeighbours) {
      const std::int32_t ix = gi.ix + o.dx;
      const std::int32_t iy = gi.iy + o.dy;
      if (!g.inside(ix, iy)) continue;
      const std::size_t nb = g.index(ix, iy);
      if (world.blocked(nb) || f.state[nb] == NodeState::Accepted) continue;
      const double w = scope.between(g, idx, nb) ? seen : plain;
      const double cand = value + w;
      if (cand < f.u[nb]) {
        f.u[nb] = cand;
        f.pred_j[nb] = idx;
        f.edge_cost[nb] = w;
        f.state[nb] = NodeState::Considered;
        heap.emplace(cand, static_cast<std::int32_t>(nb));
      }
    }
  }
  return f;
}

/// Dispatches on mode. The wind field is only consulted in upwind mode.
inline ValueField solve(const GridWorld& world, Vec2 destination, SolverMode mode, double eta,
                        const UpwindOptions& upwind = {}, const WindOptions& wind = {}) {
  if (mode == SolverMode::Dijkstra) return grid_dijkstra(world, destination, eta);
  const WindField w = build_wind_field(world, destination, wind);
  return ordered_upwind(world, w, destination, upwind);
}

}  // namespace hjplace
