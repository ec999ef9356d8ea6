#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <random>
#include <utility>
#include <vector>

#include "hjplace/errors.hpp"
#include "hjplace/geometry.hpp"
#include "hjplace/pathing.hpp"
#include "hjplace/scene.hpp"
#include "hjplace/solver.hpp"
#include "hjplace/windfield.hpp"

namespace hjplace {

enum class Aggregation { Mean, Min };

struct OdPair {
  Vec2 start{};
  Vec2 destination{};
};

inline constexpr double kUnreachablePenalty = 1e6;

struct ObjectiveConfig {
  /// Visibility weight (graph mode only).
  double eta = 1.0;
  std::vector<OdPair> od_pairs;
  Aggregation aggregation = Aggregation::Mean;
  double unreachable_penalty = kUnreachablePenalty;
  /// Evaluate pairs on worker threads. The reduction order is fixed either way.
  bool parallel = false;
  UpwindOptions upwind{};
  WindOptions wind{};

  void validate(const GridWorld& world) const {
    if (!(eta >= 0.0) || !std::isfinite(eta)) throw ValidationError("eta must be non-negative");
    if (od_pairs.empty()) throw ValidationError("objective needs at least one OD pair");
    for (const auto& p : od_pairs) {
      world.require_free(p.start, "OD start");
      world.require_free(p.destination, "OD destination");
    }
  }
};

/// Visibility-weighted length Σ len·(1 + η·in_scope) over the straight-line
/// distance between the path endpoints.
inline double path_cost(const Path& path, double eta) {
  if (path.points.size() < 2) return 0.0;
  const double d = distance(path.points.front(), path.points.back());
  if (d == 0.0) return 0.0;
  double weighted = 0.0;
  for (std::size_t i = 0; i < path.segments(); ++i) {
    const bool seen = i < path.in_scope.size() && path.in_scope[i] != 0;
    weighted += path.segment_length(i) * (1.0 + (seen ? eta : 0.0));
  }
  return weighted / d;
}

struct PairScore {
  OdPair pair;
  double value = 0.0;       ///< solver value at the start node
  double normalized = 0.0;  ///< value / straight-line distance
  bool unreachable = false;
};

struct ScoreReport {
  double score = 0.0;
  std::vector<PairScore> per_pair;
  SolverMode mode = SolverMode::Dijkstra;
  double eta = 0.0;
  bool any_unreachable = false;
};

/// Solver value for one OD pair, rooted at its destination and read at its
/// start, normalized by the straight-line distance.
inline PairScore score_pair(const GridWorld& world, const OdPair& pair, SolverMode mode,
                            const ObjectiveConfig& config) {
  PairScore s{pair};
  const auto& g = world.grid();
  const Vec2 a = g.position(g.nearest_index(pair.start));
  const Vec2 b = g.position(g.nearest_index(pair.destination));
  const double d = distance(a, b);
  if (d == 0.0) return s;
  const ValueField f = solve(world, pair.destination, mode, config.eta, config.upwind, config.wind);
  s.value = f.at(pair.start);
  if (!std::isfinite(s.value)) {
    s.unreachable = true;
    s.normalized = config.unreachable_penalty;
  } else {
    s.normalized = s.value / d;
  }
  return s;
}

/// Defender's score of the world's current cameras (higher is better).
inline ScoreReport config_score(const GridWorld& world, const ObjectiveConfig& config,
                                SolverMode mode) {
  config.validate(world);
  ScoreReport report;
  report.mode = mode;
  report.eta = config.eta;
  const std::size_t n = config.od_pairs.size();
  report.per_pair.resize(n);
  if (config.parallel && n > 1) {
    std::vector<std::future<PairScore>> jobs;
    jobs.reserve(n);
    for (const auto& p : config.od_pairs) {
      jobs.push_back(std::async(std::launch::async, [&world, p, mode, &config] {
        return score_pair(world, p, mode, config);
      }));
    }
    for (std::size_t i = 0; i < n; ++i) report.per_pair[i] = jobs[i].get();
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      report.per_pair[i] = score_pair(world, config.od_pairs[i], mode, config);
    }
  }

  std::vector<double> values;
  values.reserve(n);
  for (const auto& p : report.per_pair) {
    values.push_back(p.normalized);
    report.any_unreachable = report.any_unreachable || p.unreachable;
  }
  std::sort(values.begin(), values.end());
  if (config.aggregation == Aggregation::Min) {
    report.score = values.front();
  } else {
    double sum = 0.0;
    for (const double v : values) sum += v;
    report.score = sum / static_cast<double>(n);
  }
  return report;
}

/// Up to `budget` distinct pairs of free boundary nodes, drawn with a fixed seed.
inline std::vector<OdPair> sample_boundary_pairs(const GridWorld& world, std::size_t budget = 8,
                                                 std::uint64_t seed = 0) {
  const auto& g = world.grid();
  std::vector<std::size_t> boundary;
  for (std::int32_t j = 0; j < g.ny; ++j) {
    for (std::int32_t i = 0; i < g.nx; ++i) {
      if (i != 0 && j != 0 && i != g.nx - 1 && j != g.ny - 1) continue;
      const auto idx = g.index(i, j);
      if (!world.blocked(idx)) boundary.push_back(idx);
    }
  }
  std::vector<std::pair<std::size_t, std::size_t>> all;
  for (std::size_t a = 0; a < boundary.size(); ++a) {
    for (std::size_t b = a + 1; b < boundary.size(); ++b) all.emplace_back(boundary[a], boundary[b]);
  }
  // partial Fisher-Yates with explicit index arithmetic so the draw is portable
  std::mt19937_64 rng(seed);
  const std::size_t take = std::min(budget, all.size());
  for (std::size_t k = 0; k < take; ++k) {
    const std::size_t span = all.size() - k;
    const std::size_t pick = k + static_cast<std::size_t>(rng() % span);
    std::swap(all[k], all[pick]);
  }
  std::vector<OdPair> out;
  for (std::size_t k = 0; k < take; ++k) {
    out.push_back({g.position(all[k].first), g.position(all[k].second)});
  }
  return out;
}

}  // namespace hjplace
