#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <sstream>

#include "hjplace/errors.hpp"
#include "hjplace/geometry.hpp"

namespace hjplace {

struct Region {
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;

  void validate() const {
    if (!(x_min < x_max) || !(y_min < y_max)) {
      std::ostringstream ss;
      ss << "region: require x_min < x_max and y_min < y_max, got [" << x_min << ", " << x_max
         << "] x [" << y_min << ", " << y_max << "]";
      throw ValidationError(ss.str());
    }
  }

  bool contains(Vec2 p, double tol = 1e-9) const {
    return p.x >= x_min - tol && p.x <= x_max + tol && p.y >= y_min - tol && p.y <= y_max + tol;
  }

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
};

struct GridIndex {
  std::int32_t ix = 0;
  std::int32_t iy = 0;
  friend constexpr bool operator==(GridIndex, GridIndex) = default;
};

/// Regular node lattice. Node (ix, iy) sits at origin + h·(ix, iy) and owns the
/// square cell of side h centred on it.
struct GridSpec {
  std::int32_t nx = 2;
  std::int32_t ny = 2;
  double h = 1.0;
  Vec2 origin{};

  /// Grid whose corner nodes coincide with the region corners.
  static GridSpec covering(const Region& region, std::int32_t nx, std::int32_t ny) {
    region.validate();
    if (nx < 2 || ny < 2) throw ValidationError("grid: nx and ny must be at least 2");
    const double hx = region.width() / (nx - 1);
    const double hy = region.height() / (ny - 1);
    if (std::abs(hx - hy) > 1e-9 * std::max(hx, hy)) {
      std::ostringstream ss;
      ss << "grid: " << nx << "x" << ny << " gives non-square spacing (" << hx << " vs " << hy
         << ") on this region";
      throw ValidationError(ss.str());
    }
    GridSpec g{nx, ny, hx, {region.x_min, region.y_min}};
    g.validate();
    return g;
  }

  void validate() const {
    if (nx < 2 || ny < 2) throw ValidationError("grid: nx and ny must be at least 2");
    if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("grid: spacing h must be positive");
  }

  std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }

  bool inside(std::int32_t ix, std::int32_t iy) const {
    return ix >= 0 && iy >= 0 && ix < nx && iy < ny;
  }

  std::size_t index(std::int32_t ix, std::int32_t iy) const {
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(ix);
  }
  std::size_t index(GridIndex g) const { return index(g.ix, g.iy); }

  GridIndex coords(std::size_t idx) const {
    return {static_cast<std::int32_t>(idx % static_cast<std::size_t>(nx)),
            static_cast<std::int32_t>(idx / static_cast<std::size_t>(nx))};
  }

  Vec2 position(std::int32_t ix, std::int32_t iy) const {
    return {origin.x + h * ix, origin.y + h * iy};
  }
  Vec2 position(std::size_t idx) const {
    const auto g = coords(idx);
    return position(g.ix, g.iy);
  }

  /// Continuous lattice coordinates (node (i, j) maps to (i, j)).
  Vec2 to_lattice(Vec2 p) const { return (p - origin) / h; }

  /// Node whose cell contains `p`, clamped onto the grid.
  GridIndex nearest(Vec2 p) const {
    const Vec2 q = to_lattice(p);
    const auto ix = static_cast<std::int32_t>(std::lround(q.x));
    const auto iy = static_cast<std::int32_t>(std::lround(q.y));
    return {std::clamp(ix, 0, nx - 1), std::clamp(iy, 0, ny - 1)};
  }
  std::size_t nearest_index(Vec2 p) const { return index(nearest(p)); }

  Region extent() const {
    return {origin.x, origin.x + h * (nx - 1), origin.y, origin.y + h * (ny - 1)};
  }
};

}  // namespace hjplace
