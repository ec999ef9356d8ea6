// hjplace command-line front end: plan, place, score, render, replay.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hjplace/hjplace.hpp"

namespace fs = std::filesystem;
using namespace hjplace;
using io::json;

namespace {

enum ExitCode { kOk = 0, kValidation = 2, kUnreachable = 3, kNonConvergence = 4 };

struct Options {
  std::string scene;
  std::string out = "out";
  std::string mode = "dijkstra";
  std::string grid = "20x20";
  double eta = 1.0;
  std::string start;
  std::string dest;
  double step = 0.0;
  bool dump_wind = false;
  bool smooth = false;
  bool soft_obstacles = false;
  double xi_max = 0.99;
  double max_stencil = 0.0;
  // placement
  std::size_t cameras = 1;
  double t0 = 1.0;
  std::size_t iters = 1000;
  std::uint64_t seed = 0;
  std::string od_pairs;
  std::string proposal = "reset";
  double opening = std::numbers::pi / 2.0;
  std::size_t orientations = 0;
  std::size_t chains = 1;
  std::string aggregation = "mean";
  // render
  std::string path_file;
  // replay
  std::string manifest;
};

Vec2 parse_point(const std::string& s, const char* what) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw ValidationError(std::string(what) + ": expected X,Y");
  try {
    std::size_t used = 0;
    const double x = std::stod(s.substr(0, comma), &used);
    const double y = std::stod(s.substr(comma + 1), &used);
    return {x, y};
  } catch (const std::exception&) {
    throw ValidationError(std::string(what) + ": expected X,Y, got '" + s + "'");
  }
}

std::pair<std::int32_t, std::int32_t> parse_grid(const std::string& s) {
  const auto x = s.find_first_of("xX");
  try {
    if (x == std::string::npos) throw std::invalid_argument("no x");
    return {std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1))};
  } catch (const std::exception&) {
    throw ValidationError("--grid: expected NXxNY, got '" + s + "'");
  }
}

SolverMode parse_mode(const std::string& m) {
  if (m == "dijkstra") return SolverMode::Dijkstra;
  if (m == "upwind") return SolverMode::Upwind;
  throw ValidationError("--mode: expected dijkstra or upwind");
}

GridWorld load_world(const Options& o) {
  if (o.scene.empty()) throw ValidationError("--scene is required");
  const auto [nx, ny] = parse_grid(o.grid);
  return GridWorld(io::load_scene(o.scene), nx, ny);
}

UpwindOptions upwind_options(const Options& o) {
  UpwindOptions u;
  u.obstacle_mode = o.soft_obstacles ? ObstacleMode::SlowDown : ObstacleMode::Delete;
  u.xi_max = o.xi_max;
  u.max_stencil_cells = o.max_stencil;
  return u;
}

std::vector<OdPair> resolve_od_pairs(const Options& o, const GridWorld& world) {
  if (!o.od_pairs.empty()) {
    if (o.od_pairs.rfind("auto:", 0) == 0) {
      std::size_t m = 0;
      try {
        m = static_cast<std::size_t>(std::stoul(o.od_pairs.substr(5)));
      } catch (const std::exception&) {
        throw ValidationError("--od-pairs: expected auto:M");
      }
      return sample_boundary_pairs(world, m, o.seed);
    }
    return io::od_pairs_from_json(io::parse_json(io::read_file(o.od_pairs), o.od_pairs));
  }
  if (o.start.empty() || o.dest.empty()) {
    throw ValidationError("give --od-pairs or both --start and --dest");
  }
  return {{parse_point(o.start, "--start"), parse_point(o.dest, "--dest")}};
}

ObjectiveConfig objective_config(const Options& o, const GridWorld& world) {
  ObjectiveConfig c;
  c.eta = o.eta;
  c.od_pairs = resolve_od_pairs(o, world);
  if (o.aggregation == "min") {
    c.aggregation = Aggregation::Min;
  } else if (o.aggregation != "mean") {
    throw ValidationError("--aggregation: expected mean or min");
  }
  c.upwind = upwind_options(o);
  return c;
}

class Manifest {
 public:
  Manifest(std::string subcommand, const Options& o, std::vector<std::string> argv)
      : started_(std::chrono::steady_clock::now()) {
    doc_ = {{"subcommand", std::move(subcommand)},
            {"argv", std::move(argv)},
            {"scene", o.scene},
            {"out", o.out},
            {"mode", o.mode},
            {"grid", o.grid},
            {"eta", o.eta},
            {"seed", o.seed}};
    doc_["outputs"] = json::array();
  }

  void set(const std::string& key, json value) { doc_[key] = std::move(value); }

  void write_output(const fs::path& path, const std::string& content) {
    io::atomic_write(path, content);
    doc_["outputs"].push_back(path.filename().string());
  }

  void finish(const fs::path& dir) {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - started_;
    doc_["duration_seconds"] = dt.count();
    io::atomic_write(dir / "manifest.json", doc_.dump(2) + "\n");
  }

 private:
  json doc_;
  std::chrono::steady_clock::time_point started_;
};

int cmd_plan(const Options& o, const std::vector<std::string>& argv) {
  const GridWorld world = load_world(o);
  const SolverMode mode = parse_mode(o.mode);
  const Vec2 start = parse_point(o.start, "--start");
  const Vec2 dest = parse_point(o.dest, "--dest");
  world.require_free(start, "start");
  const fs::path dir = o.out;
  Manifest manifest("plan", o, argv);

  const WindField wind = build_wind_field(world, dest);
  const ValueField field = mode == SolverMode::Dijkstra
                               ? grid_dijkstra(world, dest, o.eta)
                               : ordered_upwind(world, wind, dest, upwind_options(o));
  manifest.write_output(dir / "value.pgm", io::value_field_pgm(field));
  manifest.write_output(dir / "value.csv", io::value_field_csv(field));
  manifest.write_output(dir / "value.svg", render::value_svg(field));
  if (o.dump_wind) {
    std::ostringstream ws;
    write_wind_csv(ws, wind);
    manifest.write_output(dir / "wind.csv", ws.str());
  }
  manifest.set("anisotropy", field.anisotropy);

  int code = kOk;
  Path path;
  try {
    if (mode == SolverMode::Dijkstra) {
      path = extract_path_discrete(field, start);
    } else {
      const double step = o.step > 0.0 ? o.step : world.grid().h / 2.0;
      path = extract_path_characteristic(field, wind, world, start, step);
    }
  } catch (const NonConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    path = e.partial();
    code = kNonConvergence;
  } catch (const UnreachableError& e) {
    manifest.set("error", e.what());
    manifest.finish(dir);
    throw;
  }
  path = annotate_visibility(std::move(path), world);
  if (o.smooth && code == kOk) path = smooth_path(path, world, o.eta);

  manifest.write_output(dir / "path.json", io::path_to_json(path, world).dump(2) + "\n");
  manifest.write_output(dir / "overlay.svg", render::overlay_svg(world, path.points));
  manifest.set("path", {{"points", path.points.size()},
                        {"total_time", path.total_time},
                        {"length", path.length()},
                        {"visible_fraction", path.visible_fraction},
                        {"in_scope_segments", path.in_scope_segments()},
                        {"path_cost", path_cost(path, o.eta)}});
  manifest.finish(dir);
  std::cout << "u(start) = " << io::format_double(field.at(start))
            << "  path points = " << path.points.size()
            << "  visible fraction = " << path.visible_fraction << "\n";
  return code;
}

int cmd_score(const Options& o, const std::vector<std::string>&) {
  const GridWorld world = load_world(o);
  const auto report = config_score(world, objective_config(o, world), parse_mode(o.mode));
  const std::string text = io::score_report_to_json(report).dump(2) + "\n";
  if (o.out.empty() || o.out == "-") {
    std::cout << text;
  } else {
    io::atomic_write(o.out, text);
  }
  return kOk;
}

int cmd_place(const Options& o, const std::vector<std::string>& argv) {
  const GridWorld world = load_world(o);
  const SolverMode mode = parse_mode(o.mode);
  const ObjectiveConfig objective = objective_config(o, world);
  SAConfig sa;
  sa.t0 = o.t0;
  sa.iterations = o.iters;
  sa.seed = o.seed;
  sa.n_cameras = o.cameras;
  sa.opening = o.opening;
  sa.proposal.orientation_steps = o.orientations;
  if (o.proposal == "reset") {
    sa.proposal.kind = ProposalKind::SingleCameraReset;
  } else if (o.proposal == "perturb") {
    sa.proposal.kind = ProposalKind::GaussianPerturb;
    sa.proposal.sigma_position = world.grid().h;
  } else if (o.proposal == "full") {
    sa.proposal.kind = ProposalKind::FullReset;
  } else {
    throw ValidationError("--proposal: expected reset, perturb or full");
  }
  if (o.chains < 1) throw ValidationError("--chains must be at least 1");

  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < o.chains; ++i) seeds.push_back(o.seed + i);
  const PlacementResult result = best_of_chains(world, sa, objective, mode, seeds);

  const fs::path dir = o.out;
  Manifest manifest("place", o, argv);
  manifest.set("sa", {{"t0", o.t0},
                      {"iters", o.iters},
                      {"cameras", o.cameras},
                      {"proposal", o.proposal},
                      {"opening", o.opening},
                      {"chains", o.chains},
                      {"best_seed", result.seed}});

  Scene placed = world.scene();
  for (const auto& c : result.best) placed.cameras.push_back(c);
  const GridWorld placed_world = world.with_cameras(placed.cameras);
  manifest.write_output(dir / "placed_scene.json", io::scene_to_json(placed).dump(2) + "\n");
  manifest.write_output(dir / "trace.csv", io::trace_csv(result.trace));
  const auto report = config_score(placed_world, objective, mode);
  manifest.write_output(dir / "score.json", io::score_report_to_json(report).dump(2) + "\n");

  // adversary's best response for the first OD pair
  const auto& pair = objective.od_pairs.front();
  std::vector<Vec2> points;
  try {
    if (mode == SolverMode::Dijkstra) {
      points = extract_path_discrete(grid_dijkstra(placed_world, pair.destination, o.eta),
                                     pair.start).points;
    } else {
      const WindField wind = build_wind_field(placed_world, pair.destination);
      const ValueField f = ordered_upwind(placed_world, wind, pair.destination, objective.upwind);
      points = extract_path_characteristic(f, wind, placed_world, pair.start,
                                           placed_world.grid().h / 2.0).points;
    }
  } catch (const NonConvergenceError& e) {
    points = e.partial().points;
  } catch (const UnreachableError&) {
  }
  manifest.write_output(dir / "overlay.svg", render::overlay_svg(placed_world, points));
  manifest.set("best_score", result.best_score);
  manifest.finish(dir);
  std::cout << "best score = " << io::format_double(result.best_score) << " (seed " << result.seed
            << ")\n";
  return kOk;
}

int cmd_render(const Options& o, const std::vector<std::string>&) {
  const GridWorld world = load_world(o);
  std::vector<Vec2> points;
  if (!o.path_file.empty()) {
    for (const auto& p : io::path_from_json(io::parse_json(io::read_file(o.path_file), o.path_file))) {
      points.push_back(p.position);
    }
  }
  const std::string svg = render::overlay_svg(world, points);
  if (o.out.empty() || o.out == "-") {
    std::cout << svg;
  } else {
    io::atomic_write(o.out, svg);
  }
  return kOk;
}

int run(const std::vector<std::string>& args);

int cmd_replay(const Options& o) {
  const json m = io::parse_json(io::read_file(o.manifest), o.manifest);
  if (!m.contains("argv") || !m.at("argv").is_array()) {
    throw ValidationError("manifest has no argv record");
  }
  const auto argv = m.at("argv").get<std::vector<std::string>>();
  if (!argv.empty() && argv.front() == "replay") throw ValidationError("refusing to replay a replay");
  return run(argv);
}

int run(const std::vector<std::string>& args) {
  Options o;
  CLI::App app{"Adversarial camera placement via Hamilton-Jacobi path planning"};
  app.require_subcommand(1);

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--scene", o.scene, "scene JSON file")->required();
    sub->add_option("--grid", o.grid, "grid resolution NXxNY")->capture_default_str();
    sub->add_option("--mode", o.mode, "solver: dijkstra or upwind")->capture_default_str();
    sub->add_option("--eta", o.eta, "visibility weight")->capture_default_str();
  };
  const auto upwind_flags = [&](CLI::App* sub) {
    sub->add_flag("--soft-obstacles", o.soft_obstacles, "slow the front in obstacles instead of deleting them");
    sub->add_option("--xi-max", o.xi_max, "obstacle slowdown bound (< 1)")->capture_default_str();
    sub->add_option("--max-stencil", o.max_stencil, "cap on the upwind stencil radius in cells (0 = none)");
  };

  auto* plan = app.add_subcommand("plan", "solve u and extract the adversary's path");
  common(plan);
  upwind_flags(plan);
  plan->add_option("--out", o.out, "output directory")->capture_default_str();
  plan->add_option("--start", o.start, "start X,Y")->required();
  plan->add_option("--dest", o.dest, "destination X,Y")->required();
  plan->add_option("--step", o.step, "descent step (upwind; default h/2)");
  plan->add_flag("--dump-wind", o.dump_wind, "write wind.csv");
  plan->add_flag("--smooth", o.smooth, "shortcut path chains outside camera scopes");

  auto* place = app.add_subcommand("place", "simulated-annealing camera placement");
  common(place);
  upwind_flags(place);
  place->add_option("--out", o.out, "output directory")->capture_default_str();
  place->add_option("--cameras", o.cameras, "number of cameras")->capture_default_str();
  place->add_option("--t0", o.t0, "initial temperature")->capture_default_str();
  place->add_option("--iters", o.iters, "iterations K")->capture_default_str();
  place->add_option("--seed", o.seed, "random seed")->capture_default_str();
  place->add_option("--od-pairs", o.od_pairs, "OD pair JSON file or auto:M");
  place->add_option("--start", o.start, "single OD pair start X,Y");
  place->add_option("--dest", o.dest, "single OD pair destination X,Y");
  place->add_option("--proposal", o.proposal, "reset, perturb or full")->capture_default_str();
  place->add_option("--opening", o.opening, "camera opening alpha (radians)")->capture_default_str();
  place->add_option("--orientations", o.orientations, "discrete headings (0 = continuous)");
  place->add_option("--chains", o.chains, "independent chains (seeds seed..seed+R-1)");
  place->add_option("--aggregation", o.aggregation, "mean or min")->capture_default_str();

  auto* score = app.add_subcommand("score", "score the scene's cameras");
  common(score);
  upwind_flags(score);
  auto* score_out = score->add_option("--out", o.out, "report file ('-' for stdout)");
  score->add_option("--od-pairs", o.od_pairs, "OD pair JSON file or auto:M");
  score->add_option("--start", o.start, "single OD pair start X,Y");
  score->add_option("--dest", o.dest, "single OD pair destination X,Y");
  score->add_option("--seed", o.seed, "seed for auto OD sampling");
  score->add_option("--aggregation", o.aggregation, "mean or min")->capture_default_str();

  auto* rend = app.add_subcommand("render", "SVG overlay of a scene and optional path");
  rend->add_option("--scene", o.scene, "scene JSON file")->required();
  rend->add_option("--grid", o.grid, "grid resolution NXxNY")->capture_default_str();
  rend->add_option("--path", o.path_file, "path JSON from plan");
  auto* render_out = rend->add_option("--out", o.out, "SVG file ('-' for stdout)");

  auto* replay = app.add_subcommand("replay", "re-run the command recorded in a manifest");
  replay->add_option("--manifest", o.manifest, "manifest.json")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }
  if ((score->parsed() && score_out->count() == 0) || (rend->parsed() && render_out->count() == 0)) {
    o.out = "-";
  }

  if (plan->parsed()) return cmd_plan(o, args);
  if (place->parsed()) return cmd_place(o, args);
  if (score->parsed()) return cmd_score(o, args);
  if (rend->parsed()) return cmd_render(o, args);
  return cmd_replay(o);
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return run(args);
  } catch (const NonConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNonConvergence;
  } catch (const UnreachableError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUnreachable;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
