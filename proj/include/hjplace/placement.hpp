#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include "hjplace/errors.hpp"
#include "hjplace/geometry.hpp"
#include "hjplace/objective.hpp"
#include "hjplace/scene.hpp"
#include "hjplace/solver.hpp"

namespace hjplace {

// Random source

/// One SplitMix64 step; used to derive independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Streams split from one seed in a fixed order: the first SplitMix64 output
/// seeds `proposals` (initial configuration and every proposal), the second
/// seeds `acceptance` (the uniform draw of each accept test).
struct RandomStreams {
  std::mt19937_64 proposals;
  std::mt19937_64 acceptance;

  static RandomStreams from_seed(std::uint64_t seed) {
    std::uint64_t s = seed;
    const std::uint64_t a = splitmix64(s);
    const std::uint64_t b = splitmix64(s);
    return {std::mt19937_64(a), std::mt19937_64(b)};
  }
};

// The distributions below are spelled out because the std:: ones are
// implementation-defined and would break cross-platform replay.

/// Uniform in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform in {0, …, n−1}, unbiased by rejection.
inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t range = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % range);
}

/// Box–Muller, one variate per call.
inline double standard_normal(std::mt19937_64& rng) {
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

// Annealing primitives

/// min{1, exp((new − old)/T)}; at T = 0 a move is taken iff it does not worsen.
inline double accept_probability(double score_old, double score_new, double temperature) {
  if (score_new >= score_old) return 1.0;
  if (!(temperature > 0.0)) return 0.0;
  return std::min(1.0, std::exp((score_new - score_old) / temperature));
}

/// Linear schedule T(k) = max(0, T0·(1 − (k+1)/K)) for k = 0 … K−1.
inline double temperature(double t0, std::size_t k, std::size_t iterations) {
  return std::max(0.0, t0 * (1.0 - static_cast<double>(k + 1) / static_cast<double>(iterations)));
}

/// Accept test against one draw from the acceptance stream.
inline bool metropolis_accept(double score_old, double score_new, double temperature,
                              std::mt19937_64& acceptance) {
  return accept_probability(score_old, score_new, temperature) > uniform01(acceptance);
}

struct AnnealRecord {
  std::size_t k = 0;
  double temperature = 0.0;
  double proposed = 0.0;
  double current = 0.0;  ///< score of the chain state after the decision
  bool accepted = false;
  double best = 0.0;
};

template <typename State>
struct AnnealResult {
  State best;
  double best_score = 0.0;
  State last;
  double last_score = 0.0;
  std::vector<AnnealRecord> records;
};

/// Generic maximizing annealer: K proposals under the linear schedule, each
/// accepted with accept_probability against a uniform draw. Tracks the
/// best-ever state alongside the chain state.
template <typename State, typename ScoreFn, typename ProposeFn>
AnnealResult<State> anneal(State initial, ScoreFn&& score, ProposeFn&& propose, double t0,
                           std::size_t iterations, std::mt19937_64& acceptance) {
  AnnealResult<State> r;
  r.last = std::move(initial);
  r.last_score = score(r.last);
  r.best = r.last;
  r.best_score = r.last_score;
  r.records.reserve(iterations);
  for (std::size_t k = 0; k < iterations; ++k) {
    const double t = temperature(t0, k, iterations);
    State candidate = propose(static_cast<const State&>(r.last));
    const double s = score(candidate);
    const bool take = metropolis_accept(r.last_score, s, t, acceptance);
    if (take) {
      r.last = std::move(candidate);
      r.last_score = s;
      if (s > r.best_score) {
        r.best = r.last;
        r.best_score = s;
      }
    }
    r.records.push_back({k, t, s, r.last_score, take, r.best_score});
  }
  return r;
}

// Camera placement

enum class ProposalKind {
  SingleCameraReset,  ///< one camera gets a fresh random node and heading
  GaussianPerturb,    ///< one camera nudged by Gaussian noise
  FullReset,          ///< every camera re-drawn
};

struct ProposalConfig {
  ProposalKind kind = ProposalKind::SingleCameraReset;
  double sigma_position = 1.0;  ///< scene units
  double sigma_angle = 0.5;     ///< radians
  bool search_opening = false;
  /// When > 0, headings are drawn from k·2π/orientation_steps.
  std::size_t orientation_steps = 0;
};

struct SAConfig {
  double t0 = 1.0;
  std::size_t iterations = 1000;
  std::uint64_t seed = 0;
  std::size_t n_cameras = 1;
  ProposalConfig proposal{};
  /// Opening and falloff given to every placed camera.
  double opening = std::numbers::pi / 2.0;
  double falloff_exponent = 2.0;

  void validate() const {
    if (!(t0 > 0.0) || !std::isfinite(t0)) throw ValidationError("SA: T0 must be positive");
    if (iterations < 1) throw ValidationError("SA: iteration count must be at least 1");
    if (!(opening > 0.0) || opening > kTwoPi) throw ValidationError("SA: opening must lie in (0, 2*pi]");
    if (!(proposal.sigma_position >= 0.0) || !(proposal.sigma_angle >= 0.0)) {
      throw ValidationError("SA: proposal sigmas must be non-negative");
    }
  }
};

namespace detail {

inline std::vector<std::size_t> free_nodes(const GridWorld& world) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < world.grid().size(); ++i) {
    if (!world.blocked(i)) out.push_back(i);
  }
  return out;
}

inline double random_heading(const ProposalConfig& p, std::mt19937_64& rng) {
  if (p.orientation_steps > 0) {
    return kTwoPi * static_cast<double>(uniform_index(rng, p.orientation_steps)) /
           static_cast<double>(p.orientation_steps);
  }
  return kTwoPi * uniform01(rng);
}

}  // namespace detail

/// Camera on a uniformly drawn free node with a uniform heading.
inline Camera random_camera(const GridWorld& world, const SAConfig& sa, std::mt19937_64& rng) {
  const auto nodes = detail::free_nodes(world);
  if (nodes.empty()) throw ValidationError("no free node to place a camera on");
  Camera c;
  c.position = world.grid().position(nodes[uniform_index(rng, nodes.size())]);
  c.beta = detail::random_heading(sa.proposal, rng);
  c.opening = sa.proposal.search_opening ? kTwoPi * (1.0 - uniform01(rng)) : sa.opening;
  c.falloff_exponent = sa.falloff_exponent;
  return c;
}

inline std::vector<Camera> random_configuration(const GridWorld& world, const SAConfig& sa,
                                                std::mt19937_64& rng) {
  std::vector<Camera> cams;
  cams.reserve(sa.n_cameras);
  for (std::size_t i = 0; i < sa.n_cameras; ++i) cams.push_back(random_camera(world, sa, rng));
  return cams;
}

/// New configuration differing from `cameras` in exactly one camera (all of
/// them for FullReset). Always returns a valid configuration.
inline std::vector<Camera> propose(const std::vector<Camera>& cameras, std::mt19937_64& rng,
                                   const GridWorld& world, const SAConfig& sa) {
  if (cameras.empty()) return cameras;
  if (sa.proposal.kind == ProposalKind::FullReset) {
    std::vector<Camera> out;
    for (std::size_t i = 0; i < cameras.size(); ++i) out.push_back(random_camera(world, sa, rng));
    return out;
  }
  std::vector<Camera> out = cameras;
  const std::size_t which = uniform_index(rng, out.size());
  Camera& c = out[which];
  if (sa.proposal.kind == ProposalKind::SingleCameraReset) {
    const Camera fresh = random_camera(world, sa, rng);
    c.position = fresh.position;
    c.beta = fresh.beta;
    if (sa.proposal.search_opening) c.opening = fresh.opening;
    return out;
  }

  const auto& region = world.scene().region;
  for (int attempt = 0; attempt < 100; ++attempt) {
    const Vec2 p{c.position.x + sa.proposal.sigma_position * standard_normal(rng),
                 c.position.y + sa.proposal.sigma_position * standard_normal(rng)};
    if (region.contains(p, 0.0) && !world.obstacles().blocked_at(p)) {
      c.position = p;
      break;
    }
  }
  c.beta = wrap_angle(c.beta + sa.proposal.sigma_angle * standard_normal(rng));
  if (sa.proposal.search_opening) {
    c.opening = std::clamp(c.opening + sa.proposal.sigma_angle * standard_normal(rng), 1e-6, kTwoPi);
  }
  return out;
}

struct SATrace {
  std::vector<AnnealRecord> records;
  std::vector<Camera> last_accepted;
  double last_score = 0.0;
};

struct PlacementResult {
  std::vector<Camera> best;
  double best_score = 0.0;
  std::uint64_t seed = 0;
  SATrace trace;
};

/// Anneals camera placements on `world` (its own cameras are ignored) to
/// maximize config_score. Deterministic in sa.seed.
inline PlacementResult simulated_annealing(const GridWorld& world, const SAConfig& sa,
                                           const ObjectiveConfig& objective, SolverMode mode) {
  sa.validate();
  const GridWorld empty = world.with_cameras({});
  objective.validate(empty);
  auto streams = RandomStreams::from_seed(sa.seed);

  auto initial = random_configuration(empty, sa, streams.proposals);
  const auto score = [&](const std::vector<Camera>& cams) {
    return config_score(empty.with_cameras(cams), objective, mode).score;
  };
  const auto step = [&](const std::vector<Camera>& cams) {
    return propose(cams, streams.proposals, empty, sa);
  };
  auto r = anneal(std::move(initial), score, step, sa.t0, sa.iterations, streams.acceptance);

  PlacementResult out;
  out.best = std::move(r.best);
  out.best_score = r.best_score;
  out.seed = sa.seed;
  out.trace.records = std::move(r.records);
  out.trace.last_accepted = std::move(r.last);
  out.trace.last_score = r.last_score;
  return out;
}

/// Independent chains, one per seed; returns the best (earliest seed on ties).
inline PlacementResult best_of_chains(const GridWorld& world, SAConfig sa,
                                      const ObjectiveConfig& objective, SolverMode mode,
                                      const std::vector<std::uint64_t>& seeds,
                                      bool parallel = false) {
  if (seeds.empty()) throw ValidationError("need at least one seed");
  std::vector<PlacementResult> results(seeds.size());
  if (parallel) {
    std::vector<std::future<PlacementResult>> jobs;
    for (const auto s : seeds) {
      SAConfig c = sa;
      c.seed = s;
      jobs.push_back(std::async(std::launch::async, [&world, c, &objective, mode] {
        return simulated_annealing(world, c, objective, mode);
      }));
    }
    for (std::size_t i = 0; i < seeds.size(); ++i) results[i] = jobs[i].get();
  } else {
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      sa.seed = seeds[i];
      results[i] = simulated_annealing(world, sa, objective, mode);
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i) {
    if (results[i].best_score > results[best].best_score) best = i;
  }
  return std::move(results[best]);
}

}  // namespace hjplace
