#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hjplace/errors.hpp"
#include "hjplace/geometry.hpp"
#include "hjplace/grid.hpp"

namespace hjplace {

// Obstacles

struct RectObstacle {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;
};

/// Obstacle given directly as solver-grid node indices.
struct CellObstacle {
  std::vector<GridIndex> cells;
};

struct PolygonObstacle {
  std::vector<Vec2> vertices;
};

using Obstacle = std::variant<RectObstacle, CellObstacle, PolygonObstacle>;

namespace detail {

inline bool on_segment(Vec2 p, Vec2 a, Vec2 b, double tol) {
  const Vec2 ab = b - a;
  const double len = norm(ab);
  if (len == 0.0) return distance(p, a) <= tol;
  if (std::abs(cross(ab, p - a)) / len > tol) return false;
  const double t = dot(p - a, ab) / (len * len);
  return t >= -tol / len && t <= 1.0 + tol / len;
}

}  // namespace detail

/// Even-odd containment; points on an edge count as inside.
inline bool polygon_contains(const std::vector<Vec2>& poly, Vec2 p, double tol = 1e-9) {
  const std::size_t n = poly.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[j];
    if (detail::on_segment(p, a, b, tol)) return true;
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

/// Geometric containment for rect/polygon obstacles. Cell obstacles only have
/// meaning on a grid and report false here.
inline bool obstacle_contains(const Obstacle& obs, Vec2 p, double tol = 1e-9) {
  return std::visit(
      [&](const auto& o) -> bool {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, RectObstacle>) {
          return p.x >= o.x_min - tol && p.x <= o.x_max + tol && p.y >= o.y_min - tol &&
                 p.y <= o.y_max + tol;
        } else if constexpr (std::is_same_v<T, PolygonObstacle>) {
          return polygon_contains(o.vertices, p, tol);
        } else {
          return false;
        }
      },
      obs);
}

// Cameras and scene

struct Camera {
  Vec2 position{};
  double beta = 0.0;                 ///< first ray, clockwise from north
  double opening = kTwoPi;           ///< angular opening α in (0, 2π]
  double falloff_exponent = 2.0;     ///< magnitude law 1/dist^p
};

struct Scene {
  Region region{};
  std::vector<Obstacle> obstacles;
  std::vector<Camera> cameras;
  double base_speed = 1.0;

  /// Checks every grid-independent invariant and normalizes camera angles.
  void validate() {
    region.validate();
    if (!(base_speed > 0.0) || !std::isfinite(base_speed)) {
      throw ValidationError("base_speed must be a positive finite number");
    }
    for (std::size_t i = 0; i < obstacles.size(); ++i) validate_obstacle(i);
    for (std::size_t i = 0; i < cameras.size(); ++i) validate_camera(i);
  }

 private:
  void validate_obstacle(std::size_t i) const {
    const auto fail = [&](const std::string& what) {
      std::ostringstream ss;
      ss << "obstacles[" << i << "]: " << what;
      throw ValidationError(ss.str());
    };
    std::visit(
        [&](const auto& o) {
          using T = std::decay_t<decltype(o)>;
          if constexpr (std::is_same_v<T, RectObstacle>) {
            if (!(o.x_min <= o.x_max) || !(o.y_min <= o.y_max)) fail("rect has inverted bounds");
            if (!region.contains({o.x_min, o.y_min}) || !region.contains({o.x_max, o.y_max})) {
              fail("rect extends outside the region");
            }
          } else if constexpr (std::is_same_v<T, PolygonObstacle>) {
            if (o.vertices.size() < 3) fail("polygon needs at least 3 vertices");
            for (const auto& v : o.vertices) {
              if (!region.contains(v)) fail("polygon vertex outside the region");
            }
          }
        },
        obstacles[i]);
  }

  void validate_camera(std::size_t i) {
    auto& c = cameras[i];
    const auto fail = [&](const std::string& what) {
      std::ostringstream ss;
      ss << "cameras[" << i << "]: " << what;
      throw ValidationError(ss.str());
    };
    if (!std::isfinite(c.position.x) || !std::isfinite(c.position.y)) fail("non-finite position");
    if (!region.contains(c.position)) fail("position outside the region");
    if (!std::isfinite(c.beta)) fail("non-finite beta");
    if (!(c.opening > 0.0) || c.opening > kTwoPi + 1e-12) fail("alpha must lie in (0, 2*pi]");
    if (!(c.falloff_exponent >= 0.0)) fail("falloff_exponent must be non-negative");
    c.beta = wrap_angle(c.beta);
    c.opening = std::min(c.opening, kTwoPi);
    for (const auto& obs : obstacles) {
      if (obstacle_contains(obs, c.position)) fail("position inside an obstacle");
    }
  }
};

// Rasterized obstacles

/// Canonical obstacle form: one flag per grid node (its cell is blocked).
class ObstacleRaster {
 public:
  ObstacleRaster() = default;
  explicit ObstacleRaster(GridSpec grid)
      : grid_(grid), blocked_(std::make_shared<std::vector<std::uint8_t>>(grid.size(), 0)) {}
  ObstacleRaster(GridSpec grid, std::vector<std::uint8_t> blocked)
      : grid_(grid), blocked_(std::make_shared<std::vector<std::uint8_t>>(std::move(blocked))) {
    if (blocked_->size() != grid_.size()) throw ValidationError("obstacle mask size mismatch");
  }

  /// Rasterizes rect/polygon obstacles by node-centre containment and copies
  /// cell obstacles verbatim.
  static ObstacleRaster rasterize(const GridSpec& grid, const std::vector<Obstacle>& obstacles) {
    grid.validate();
    std::vector<std::uint8_t> mask(grid.size(), 0);
    for (std::size_t k = 0; k < obstacles.size(); ++k) {
      if (const auto* cells = std::get_if<CellObstacle>(&obstacles[k])) {
        for (const auto& c : cells->cells) {
          if (!grid.inside(c.ix, c.iy)) {
            std::ostringstream ss;
            ss << "obstacles[" << k << "]: cell (" << c.ix << ", " << c.iy << ") outside the "
               << grid.nx << "x" << grid.ny << " grid";
            throw ValidationError(ss.str());
          }
          mask[grid.index(c)] = 1;
        }
        continue;
      }
      for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!mask[i] && obstacle_contains(obstacles[k], grid.position(i))) mask[i] = 1;
      }
    }
    return ObstacleRaster(grid, std::move(mask));
  }

  const GridSpec& grid() const { return grid_; }
  bool blocked(std::size_t idx) const { return (*blocked_)[idx] != 0; }
  bool blocked(std::int32_t ix, std::int32_t iy) const { return blocked(grid_.index(ix, iy)); }
  bool blocked_at(Vec2 p) const { return blocked(grid_.nearest_index(p)); }
  const std::vector<std::uint8_t>& mask() const { return *blocked_; }
  bool empty() const {
    for (auto b : *blocked_) {
      if (b) return false;
    }
    return true;
  }

 private:
  GridSpec grid_{};
  std::shared_ptr<const std::vector<std::uint8_t>> blocked_;
};

inline constexpr double kTouchTolerance = 1e-9;

/// Visits every grid cell whose closed square touches segment [a, b]
/// (supercover rasterization), clipped to the grid. Returns false early if the
/// visitor does.
template <typename Visitor>
bool for_each_supercover_cell(const GridSpec& grid, Vec2 a, Vec2 b, Visitor&& visit) {
  constexpr double tol = kTouchTolerance;
  const Vec2 p = grid.to_lattice(a);
  const Vec2 q = grid.to_lattice(b);
  const auto lo_cell = [](double v) { return static_cast<std::int32_t>(std::ceil(v - 0.5 - tol)); };
  const auto hi_cell = [](double v) { return static_cast<std::int32_t>(std::floor(v + 0.5 + tol)); };

  const double x_lo = std::min(p.x, q.x);
  const double x_hi = std::max(p.x, q.x);
  const std::int32_t i0 = std::max(lo_cell(x_lo), 0);
  const std::int32_t i1 = std::min(hi_cell(x_hi), grid.nx - 1);
  const bool vertical = (x_hi - x_lo) <= tol;

  for (std::int32_t i = i0; i <= i1; ++i) {
    double y_lo;
    double y_hi;
    if (vertical) {
      y_lo = std::min(p.y, q.y);
      y_hi = std::max(p.y, q.y);
    } else {
      // portion of the segment inside the closed column slab of cell i
      double s0 = std::max(x_lo, i - 0.5);
      double s1 = std::min(x_hi, i + 0.5);
      if (s0 > s1) s0 = s1 = (s0 + s1) / 2.0;  // touching within tolerance
      const double slope = (q.y - p.y) / (q.x - p.x);
      const double ya = p.y + (s0 - p.x) * slope;
      const double yb = p.y + (s1 - p.x) * slope;
      y_lo = std::min(ya, yb);
      y_hi = std::max(ya, yb);
    }
    const std::int32_t j0 = std::max(lo_cell(y_lo), 0);
    const std::int32_t j1 = std::min(hi_cell(y_hi), grid.ny - 1);
    for (std::int32_t j = j0; j <= j1; ++j) {
      if (!visit(GridIndex{i, j})) return false;
    }
  }
  return true;
}

namespace detail {

inline bool cell_touches(const GridSpec& grid, GridIndex c, Vec2 p) {
  const Vec2 q = grid.to_lattice(p);
  return std::abs(q.x - c.ix) <= 0.5 + kTouchTolerance && std::abs(q.y - c.iy) <= 0.5 + kTouchTolerance;
}

}  // namespace detail

/// True iff no obstacle cell touches segment [a, b], ignoring the cells that
/// contain either endpoint.
inline bool line_of_sight(const ObstacleRaster& raster, Vec2 a, Vec2 b) {
  const auto& grid = raster.grid();
  return for_each_supercover_cell(grid, a, b, [&](GridIndex c) {
    if (!raster.blocked(c.ix, c.iy)) return true;
    return detail::cell_touches(grid, c, a) || detail::cell_touches(grid, c, b);
  });
}

// Field of view

/// Bearing of camera→point, clockwise from north, in [0, 2π). A point at the
/// camera position reports 0.
inline double bearing_from_camera(const Camera& camera, Vec2 point) {
  return compass_heading(point - camera.position);
}

inline constexpr double kAngleTolerance = 1e-9;

/// Closed angular-interval test [β, β+α] modulo 2π.
inline bool within_wedge(const Camera& camera, double bearing) {
  if (camera.opening >= kTwoPi) return true;
  const double offset = wrap_angle(bearing - camera.beta);
  return offset <= camera.opening + kAngleTolerance || offset >= kTwoPi - kAngleTolerance;
}

/// Field-of-view membership: inside the wedge and not occluded. Points whose
/// cell is an obstacle are never in scope; the camera position always is.
inline bool in_scope(const Camera& camera, Vec2 point, const ObstacleRaster& obstacles) {
  if (obstacles.blocked_at(point)) return false;
  if (distance(camera.position, point) <= 1e-12) return true;
  if (!within_wedge(camera, bearing_from_camera(camera, point))) return false;
  return line_of_sight(obstacles, camera.position, point);
}

inline std::vector<std::uint8_t> scope_mask(const Camera& camera, const ObstacleRaster& obstacles) {
  const auto& grid = obstacles.grid();
  std::vector<std::uint8_t> mask(grid.size(), 0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (obstacles.blocked(i)) continue;
    mask[i] = in_scope(camera, grid.position(i), obstacles) ? 1 : 0;
  }
  return mask;
}

/// Scene bound to a solver grid: the validated scene plus its obstacle raster.
/// Immutable; copies share the raster.
class GridWorld {
 public:
  GridWorld(Scene scene, GridSpec grid) : scene_(std::move(scene)) {
    scene_.validate();
    grid.validate();
    raster_ = ObstacleRaster::rasterize(grid, scene_.obstacles);
    check_cameras();
  }

  GridWorld(Scene scene, std::int32_t nx, std::int32_t ny)
      : GridWorld(scene, GridSpec::covering(scene.region, nx, ny)) {}

  const Scene& scene() const { return scene_; }
  const GridSpec& grid() const { return raster_.grid(); }
  const ObstacleRaster& obstacles() const { return raster_; }
  const std::vector<Camera>& cameras() const { return scene_.cameras; }
  double base_speed() const { return scene_.base_speed; }
  bool blocked(std::size_t idx) const { return raster_.blocked(idx); }

  /// Same world with a different camera list; the raster is shared.
  GridWorld with_cameras(std::vector<Camera> cameras) const {
    GridWorld copy = *this;
    copy.scene_.cameras = std::move(cameras);
    for (std::size_t i = 0; i < copy.scene_.cameras.size(); ++i) {
      auto& c = copy.scene_.cameras[i];
      c.beta = wrap_angle(c.beta);
      if (!copy.scene_.region.contains(c.position)) {
        std::ostringstream ss;
        ss << "cameras[" << i << "]: position outside the region";
        throw ValidationError(ss.str());
      }
    }
    copy.check_cameras();
    return copy;
  }

  /// Seen by at least one camera.
  bool visible(Vec2 p) const {
    for (const auto& c : scene_.cameras) {
      if (in_scope(c, p, raster_)) return true;
    }
    return false;
  }

  /// Union of the camera scope masks.
  std::vector<std::uint8_t> coverage_mask() const {
    std::vector<std::uint8_t> mask(grid().size(), 0);
    for (const auto& c : scene_.cameras) {
      const auto m = scope_mask(c, raster_);
      for (std::size_t i = 0; i < mask.size(); ++i) mask[i] |= m[i];
    }
    return mask;
  }

  /// Rejects points outside the region or on an obstacle cell.
  void require_free(Vec2 p, const char* what) const {
    if (!scene_.region.contains(p)) {
      std::ostringstream ss;
      ss << what << " (" << p.x << ", " << p.y << ") lies outside the region";
      throw ValidationError(ss.str());
    }
    if (raster_.blocked_at(p)) {
      std::ostringstream ss;
      ss << what << " (" << p.x << ", " << p.y << ") lies on an obstacle";
      throw ValidationError(ss.str());
    }
  }

 private:
  void check_cameras() const {
    for (std::size_t i = 0; i < scene_.cameras.size(); ++i) {
      if (raster_.blocked_at(scene_.cameras[i].position)) {
        std::ostringstream ss;
        ss << "cameras[" << i << "]: position inside an obstacle cell";
        throw ValidationError(ss.str());
      }
    }
  }

  Scene scene_;
  ObstacleRaster raster_;
};

}  // namespace hjplace
