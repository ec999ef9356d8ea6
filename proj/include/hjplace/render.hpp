#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "hjplace/scene.hpp"
#include "hjplace/solver.hpp"

namespace hjplace::render {

// Colour code: obstacles red, camera-visible blue, path green, path
// inside a scope purple.
inline constexpr const char* kFree = "#f4f4f4";
inline constexpr const char* kObstacle = "#d62728";
inline constexpr const char* kVisible = "#1f77b4";
inline constexpr const char* kPath = "#2ca02c";
inline constexpr const char* kPathVisible = "#9467bd";

struct OverlayOptions {
  double cell_px = 20.0;
  bool draw_cameras = true;
};

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s = buf;
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

struct Canvas {
  GridSpec grid;
  double px;
  double x(double wx) const { return ((wx - grid.origin.x) / grid.h + 0.5) * px; }
  double y(double wy) const { return (grid.ny - 0.5 - (wy - grid.origin.y) / grid.h) * px; }
  double width() const { return grid.nx * px; }
  double height() const { return grid.ny * px; }
};

inline std::string header(const Canvas& c) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(c.width()) + "\" height=\"" +
         num(c.height()) + "\" viewBox=\"0 0 " + num(c.width()) + ' ' + num(c.height()) + "\">\n";
}

inline void cell(std::string& out, const Canvas& c, std::int32_t ix, std::int32_t iy,
                 const char* fill) {
  out += "<rect x=\"" + num(ix * c.px) + "\" y=\"" + num((c.grid.ny - 1 - iy) * c.px) +
         "\" width=\"" + num(c.px) + "\" height=\"" + num(c.px) + "\" fill=\"" + fill + "\"/>\n";
}

inline void cameras(std::string& out, const Canvas& c, const GridWorld& world) {
  const double ray = std::max(c.grid.nx, c.grid.ny) * c.grid.h * 0.25;
  for (const auto& cam : world.cameras()) {
    const double cx = c.x(cam.position.x);
    const double cy = c.y(cam.position.y);
    if (cam.opening < kTwoPi) {
      for (const double a : {cam.beta, cam.beta + cam.opening}) {
        const Vec2 tip = cam.position + ray * Vec2{std::sin(a), std::cos(a)};
        out += "<line x1=\"" + num(cx) + "\" y1=\"" + num(cy) + "\" x2=\"" + num(c.x(tip.x)) +
               "\" y2=\"" + num(c.y(tip.y)) + "\" stroke=\"#000\" stroke-width=\"1.5\"/>\n";
      }
    }
    out += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(c.px * 0.35) +
           "\" fill=\"#000\"/>\n";
  }
}

}  // namespace detail

/// Grid overlay: every node is coloured by class and the path drawn on top.
/// Output depends only on the arguments.
inline std::string overlay_svg(const GridWorld& world, const std::vector<Vec2>& path,
                               const OverlayOptions& options = {}) {
  const auto& g = world.grid();
  const detail::Canvas canvas{g, options.cell_px};
  const auto coverage = world.coverage_mask();
  std::vector<std::uint8_t> on_path(g.size(), 0);
  for (const auto& p : path) on_path[g.nearest_index(p)] = 1;

  std::string out = detail::header(canvas);
  for (std::int32_t iy = 0; iy < g.ny; ++iy) {
    for (std::int32_t ix = 0; ix < g.nx; ++ix) {
      const auto i = g.index(ix, iy);
      const char* fill = kFree;
      if (world.blocked(i)) {
        fill = kObstacle;
      } else if (on_path[i]) {
        fill = coverage[i] ? kPathVisible : kPath;
      } else if (coverage[i]) {
        fill = kVisible;
      }
      detail::cell(out, canvas, ix, iy, fill);
    }
  }
  if (path.size() >= 2) {
    out += "<polyline fill=\"none\" stroke=\"#114411\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < path.size(); ++k) {
      if (k) out += ' ';
      out += detail::num(canvas.x(path[k].x)) + ',' + detail::num(canvas.y(path[k].y));
    }
    out += "\"/>\n";
  }
  if (options.draw_cameras) detail::cameras(out, canvas, world);
  out += "</svg>\n";
  return out;
}

/// Heat map of u (dark = near the destination, white = unreachable).
inline std::string value_svg(const ValueField& field, double cell_px = 20.0) {
  const detail::Canvas canvas{field.grid, cell_px};
  double u_max = 0.0;
  for (const double u : field.u) {
    if (std::isfinite(u)) u_max = std::max(u_max, u);
  }
  std::string out = detail::header(canvas);
  for (std::int32_t iy = 0; iy < field.grid.ny; ++iy) {
    for (std::int32_t ix = 0; ix < field.grid.nx; ++ix) {
      const double u = field.u[field.grid.index(ix, iy)];
      char fill[8];
      if (!std::isfinite(u)) {
        std::snprintf(fill, sizeof fill, "#ffffff");
      } else {
        const double t = u_max > 0.0 ? u / u_max : 0.0;
        // dark blue → yellow ramp
        const int r = static_cast<int>(std::lround(30 + 220 * t));
        const int gr = static_cast<int>(std::lround(20 + 200 * t));
        const int b = static_cast<int>(std::lround(110 - 80 * t));
        std::snprintf(fill, sizeof fill, "#%02x%02x%02x", r, gr, b);
      }
      detail::cell(out, canvas, ix, iy, fill);
    }
  }
  out += "</svg>\n";
  return out;
}

}  // namespace hjplace::render
