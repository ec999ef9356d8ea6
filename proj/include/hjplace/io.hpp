#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hjplace/errors.hpp"
#include "hjplace/objective.hpp"
#include "hjplace/pathing.hpp"
#include "hjplace/placement.hpp"
#include "hjplace/scene.hpp"
#include "hjplace/solver.hpp"

namespace hjplace::io {

using json = nlohmann::json;

namespace detail {

inline void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected a JSON object");
}

inline void reject_unknown(const json& j, const std::string& where,
                           std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ValidationError(where + ": unknown key '" + key + "'");
  }
}

inline double number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ValidationError(where + ": missing key '" + key + "'");
  const auto& v = j.at(key);
  if (!v.is_number()) throw ValidationError(where + ": key '" + key + "' must be a number");
  return v.get<double>();
}

inline double number_or(const json& j, const char* key, double fallback, const std::string& where) {
  return j.contains(key) ? number(j, key, where) : fallback;
}

inline Vec2 point(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ValidationError(where + ": expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

inline Obstacle parse_obstacle(const json& j, const std::string& where) {
  require_object(j, where);
  if (!j.contains("type") || !j.at("type").is_string()) {
    throw ValidationError(where + ": missing string key 'type'");
  }
  const auto type = j.at("type").get<std::string>();
  if (type == "rect") {
    reject_unknown(j, where, {"type", "x_min", "x_max", "y_min", "y_max"});
    return RectObstacle{number(j, "x_min", where), number(j, "x_max", where),
                        number(j, "y_min", where), number(j, "y_max", where)};
  }
  if (type == "cells") {
    reject_unknown(j, where, {"type", "cells"});
    if (!j.contains("cells") || !j.at("cells").is_array()) {
      throw ValidationError(where + ": 'cells' must be an array of [ix, iy]");
    }
    CellObstacle c;
    for (const auto& e : j.at("cells")) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
        throw ValidationError(where + ": each cell must be [ix, iy] integers");
      }
      c.cells.push_back({e[0].get<std::int32_t>(), e[1].get<std::int32_t>()});
    }
    return c;
  }
  if (type == "polygon") {
    reject_unknown(j, where, {"type", "vertices"});
    if (!j.contains("vertices") || !j.at("vertices").is_array()) {
      throw ValidationError(where + ": 'vertices' must be an array of [x, y]");
    }
    PolygonObstacle p;
    for (const auto& v : j.at("vertices")) p.vertices.push_back(point(v, where));
    return p;
  }
  throw ValidationError(where + ": unknown obstacle type '" + type + "'");
}

}  // namespace detail

// Scene files

inline Scene scene_from_json(const json& j) {
  detail::require_object(j, "scene");
  detail::reject_unknown(j, "scene", {"region", "base_speed", "obstacles", "cameras"});
  if (!j.contains("region")) throw ValidationError("scene: missing key 'region'");
  Scene s;
  const auto& r = j.at("region");
  detail::require_object(r, "region");
  detail::reject_unknown(r, "region", {"x_min", "x_max", "y_min", "y_max"});
  s.region = {detail::number(r, "x_min", "region"), detail::number(r, "x_max", "region"),
              detail::number(r, "y_min", "region"), detail::number(r, "y_max", "region")};
  s.base_speed = detail::number_or(j, "base_speed", 1.0, "scene");
  if (j.contains("obstacles")) {
    if (!j.at("obstacles").is_array()) throw ValidationError("scene: 'obstacles' must be an array");
    std::size_t i = 0;
    for (const auto& o : j.at("obstacles")) {
      s.obstacles.push_back(detail::parse_obstacle(o, "obstacles[" + std::to_string(i++) + "]"));
    }
  }
  if (j.contains("cameras")) {
    if (!j.at("cameras").is_array()) throw ValidationError("scene: 'cameras' must be an array");
    std::size_t i = 0;
    for (const auto& c : j.at("cameras")) {
      const std::string where = "cameras[" + std::to_string(i++) + "]";
      detail::require_object(c, where);
      detail::reject_unknown(c, where, {"x", "y", "beta", "alpha", "falloff_exponent"});
      Camera cam;
      cam.position = {detail::number(c, "x", where), detail::number(c, "y", where)};
      cam.beta = detail::number(c, "beta", where);
      cam.opening = detail::number(c, "alpha", where);
      cam.falloff_exponent = detail::number_or(c, "falloff_exponent", 2.0, where);
      s.cameras.push_back(cam);
    }
  }
  s.validate();
  return s;
}

inline json camera_to_json(const Camera& c) {
  return {{"x", c.position.x},
          {"y", c.position.y},
          {"beta", c.beta},
          {"alpha", c.opening},
          {"falloff_exponent", c.falloff_exponent}};
}

inline json scene_to_json(const Scene& s) {
  json obstacles = json::array();
  for (const auto& o : s.obstacles) {
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, RectObstacle>) {
            obstacles.push_back({{"type", "rect"},
                                 {"x_min", v.x_min},
                                 {"x_max", v.x_max},
                                 {"y_min", v.y_min},
                                 {"y_max", v.y_max}});
          } else if constexpr (std::is_same_v<T, CellObstacle>) {
            json cells = json::array();
            for (const auto& c : v.cells) cells.push_back({c.ix, c.iy});
            obstacles.push_back({{"type", "cells"}, {"cells", cells}});
          } else {
            json verts = json::array();
            for (const auto& p : v.vertices) verts.push_back({p.x, p.y});
            obstacles.push_back({{"type", "polygon"}, {"vertices", verts}});
          }
        },
        o);
  }
  json cameras = json::array();
  for (const auto& c : s.cameras) cameras.push_back(camera_to_json(c));
  return {{"region",
           {{"x_min", s.region.x_min},
            {"x_max", s.region.x_max},
            {"y_min", s.region.y_min},
            {"y_max", s.region.y_max}}},
          {"base_speed", s.base_speed},
          {"obstacles", obstacles},
          {"cameras", cameras}};
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(what + ": invalid JSON (" + e.what() + ")");
  }
}

inline Scene load_scene(const std::filesystem::path& path) {
  return scene_from_json(parse_json(read_file(path), path.string()));
}

/// Writes via a sibling temporary and rename, so readers never see a partial file.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// Formatting helpers

inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Value fields

/// P2 grayscale, top row first; u is mapped linearly onto 0..65535 with
/// unreachable nodes at 0. The comment line records the scale.
inline std::string value_field_pgm(const ValueField& f) {
  double u_max = 0.0;
  for (const double u : f.u) {
    if (std::isfinite(u)) u_max = std::max(u_max, u);
  }
  std::ostringstream os;
  os << "P2\n# u_max " << format_double(u_max) << " maps to 65535; unreachable = 0\n"
     << f.grid.nx << ' ' << f.grid.ny << "\n65535\n";
  for (std::int32_t iy = f.grid.ny - 1; iy >= 0; --iy) {
    for (std::int32_t ix = 0; ix < f.grid.nx; ++ix) {
      const double u = f.u[f.grid.index(ix, iy)];
      long px = 0;
      if (std::isfinite(u) && u_max > 0.0) px = std::lround(u / u_max * 65535.0);
      os << px << (ix + 1 < f.grid.nx ? ' ' : '\n');
    }
  }
  return os.str();
}

inline std::string value_field_csv(const ValueField& f) {
  std::ostringstream os;
  os << "ix,iy,u\n";
  for (std::size_t i = 0; i < f.grid.size(); ++i) {
    const auto g = f.grid.coords(i);
    os << g.ix << ',' << g.iy << ',' << format_double(f.u[i]) << '\n';
  }
  return os.str();
}

struct PgmImage {
  std::int32_t width = 0;
  std::int32_t height = 0;
  long max_value = 0;
  std::vector<std::string> comments;
  std::vector<long> pixels;  ///< row-major, top row first
};

inline PgmImage parse_pgm(const std::string& text) {
  std::istringstream in(text);
  std::string magic;
  in >> magic;
  if (magic != "P2") throw ValidationError("not a P2 PGM");
  PgmImage img;
  std::vector<long> numbers;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') {
      img.comments.push_back(line.substr(1));
      continue;
    }
    std::istringstream ls(line);
    long v;
    while (ls >> v) numbers.push_back(v);
  }
  if (numbers.size() < 3) throw ValidationError("truncated PGM header");
  img.width = static_cast<std::int32_t>(numbers[0]);
  img.height = static_cast<std::int32_t>(numbers[1]);
  img.max_value = numbers[2];
  img.pixels.assign(numbers.begin() + 3, numbers.end());
  if (img.pixels.size() != static_cast<std::size_t>(img.width) * img.height) {
    throw ValidationError("PGM pixel count does not match its header");
  }
  return img;
}

// Paths, scores, traces

/// JSON array of {x, y, in_scope}, one entry per path point; in_scope tells
/// whether a camera sees that point.
inline json path_to_json(const Path& path, const GridWorld& world) {
  json out = json::array();
  for (const auto& p : path.points) {
    out.push_back({{"x", p.x}, {"y", p.y}, {"in_scope", world.visible(p)}});
  }
  return out;
}

struct PathPoint {
  Vec2 position;
  bool in_scope = false;
};

inline std::vector<PathPoint> path_from_json(const json& j) {
  if (!j.is_array()) throw ValidationError("path: expected a JSON array");
  std::vector<PathPoint> out;
  std::size_t i = 0;
  for (const auto& e : j) {
    const std::string where = "path[" + std::to_string(i++) + "]";
    detail::require_object(e, where);
    detail::reject_unknown(e, where, {"x", "y", "in_scope"});
    PathPoint p;
    p.position = {detail::number(e, "x", where), detail::number(e, "y", where)};
    p.in_scope = e.value("in_scope", false);
    out.push_back(p);
  }
  return out;
}

inline const char* mode_name(SolverMode m) { return m == SolverMode::Dijkstra ? "dijkstra" : "upwind"; }

inline json score_report_to_json(const ScoreReport& r) {
  json pairs = json::array();
  for (const auto& p : r.per_pair) {
    json value = std::isfinite(p.value) ? json(p.value) : json(nullptr);
    pairs.push_back({{"start", {p.pair.start.x, p.pair.start.y}},
                     {"dest", {p.pair.destination.x, p.pair.destination.y}},
                     {"value", value},
                     {"normalized", p.normalized},
                     {"unreachable", p.unreachable}});
  }
  return {{"score", r.score},
          {"per_pair", pairs},
          {"mode", mode_name(r.mode)},
          {"eta", r.eta},
          {"any_unreachable", r.any_unreachable}};
}

inline std::vector<OdPair> od_pairs_from_json(const json& j) {
  if (!j.is_array()) throw ValidationError("od pairs: expected a JSON array");
  std::vector<OdPair> out;
  std::size_t i = 0;
  for (const auto& e : j) {
    const std::string where = "od_pairs[" + std::to_string(i++) + "]";
    detail::require_object(e, where);
    detail::reject_unknown(e, where, {"start", "dest"});
    if (!e.contains("start") || !e.contains("dest")) {
      throw ValidationError(where + ": needs 'start' and 'dest'");
    }
    out.push_back({detail::point(e.at("start"), where), detail::point(e.at("dest"), where)});
  }
  return out;
}

inline std::string trace_csv(const SATrace& trace) {
  std::ostringstream os;
  os << "k,T,score_proposed,accepted,score_best\n";
  for (const auto& r : trace.records) {
    os << r.k << ',' << format_double(r.temperature) << ',' << format_double(r.proposed) << ','
       << (r.accepted ? 1 : 0) << ',' << format_double(r.best) << '\n';
  }
  return os.str();
}

}  // namespace hjplace::io
