#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <utility>
#include <vector>

#include "hjplace/errors.hpp"
#include "hjplace/geometry.hpp"
#include "hjplace/scene.hpp"

namespace hjplace {

struct WindOptions {
  /// Magnitudes are clamped to (1 − cap_epsilon)·base_speed.
  double cap_epsilon = 0.05;
};

/// Per-node camera-induced "headwind": zero outside every scope, otherwise
/// pointing away from the destination.
class WindField {
 public:
  WindField() = default;
  WindField(GridSpec grid, std::vector<Vec2> vectors, Vec2 destination)
      : grid_(grid), vectors_(std::move(vectors)), destination_(destination) {
    if (vectors_.size() != grid_.size()) throw ValidationError("wind field size mismatch");
  }

  /// A calm field on `grid`.
  static WindField zero(const GridSpec& grid, Vec2 destination) {
    return WindField(grid, std::vector<Vec2>(grid.size()), destination);
  }

  const GridSpec& grid() const { return grid_; }
  Vec2 destination() const { return destination_; }
  const std::vector<Vec2>& vectors() const { return vectors_; }
  Vec2 at(std::size_t idx) const { return vectors_[idx]; }

  /// Wind of the cell containing `p`.
  Vec2 sample(Vec2 p) const { return vectors_[grid_.nearest_index(p)]; }

  double max_magnitude() const {
    double m = 0.0;
    for (const auto& v : vectors_) m = std::max(m, norm(v));
    return m;
  }

 private:
  GridSpec grid_{};
  std::vector<Vec2> vectors_;
  Vec2 destination_{};
};

/// Builds W for `destination`. Magnitude at node X is the sum over cameras
/// seeing X of 1/dist^p, clamped to the cap; direction is −unit(dest − X).
/// The destination is snapped to its grid node.
inline WindField build_wind_field(const GridWorld& world, Vec2 destination,
                                  const WindOptions& options = {}) {
  if (!(options.cap_epsilon > 0.0 && options.cap_epsilon < 1.0)) {
    throw ConfigurationError("wind cap epsilon must lie in (0, 1)");
  }
  world.require_free(destination, "destination");
  const auto& grid = world.grid();
  const std::size_t dest_idx = grid.nearest_index(destination);
  const Vec2 dest = grid.position(dest_idx);
  const double cap = (1.0 - options.cap_epsilon) * world.base_speed();

  std::vector<Vec2> vectors(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i == dest_idx || world.blocked(i)) continue;
    const Vec2 x = grid.position(i);
    double magnitude = 0.0;
    for (const auto& cam : world.cameras()) {
      if (!in_scope(cam, x, world.obstacles())) continue;
      const double d = distance(cam.position, x);
      magnitude += (d > 0.0 || cam.falloff_exponent == 0.0)
                       ? std::pow(d, -cam.falloff_exponent)
                       : std::numeric_limits<double>::infinity();
    }
    if (magnitude == 0.0) continue;
    magnitude = std::min(magnitude, cap);
    vectors[i] = -magnitude * normalized(dest - x);
  }
  return WindField(grid, std::move(vectors), dest);
}

/// Debug dump: one `x,y,wx,wy` row per node, row-major.
inline void write_wind_csv(std::ostream& os, const WindField& wind) {
  os << "x,y,wx,wy\n";
  os.precision(17);
  for (std::size_t i = 0; i < wind.grid().size(); ++i) {
    const Vec2 p = wind.grid().position(i);
    const Vec2 w = wind.at(i);
    os << p.x << ',' << p.y << ',' << w.x << ',' << w.y << '\n';
  }
}

}  // namespace hjplace
