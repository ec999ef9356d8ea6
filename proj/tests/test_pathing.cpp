#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "hjplace/objective.hpp"
#include "hjplace/pathing.hpp"
#include "support/oracles.hpp"
#include "support/scenes.hpp"

using namespace hjplace;
using hjplace::testing::random_world;
using hjplace::testing::unit_scene;

namespace {

Camera wedge(Vec2 p, double beta, double alpha) {
  Camera c;
  c.position = p;
  c.beta = beta;
  c.opening = alpha;
  return c;
}

std::size_t in_scope_edges(const GridWorld& w, const Path& p) {
  return annotate_visibility(p, w).in_scope_segments();
}

}  // namespace

TEST(DiscretePath, ManhattanCornerToCorner) {
  const GridWorld w(unit_scene(3), 3, 3);
  const auto f = grid_dijkstra(w, {0, 0}, 1.0);
  const auto p = extract_path_discrete(f, {2, 2});
  ASSERT_EQ(p.points.size(), 5u);
  EXPECT_DOUBLE_EQ(p.total_time, 4.0);
  EXPECT_DOUBLE_EQ(p.length(), 4.0);
  EXPECT_EQ(p.points.front(), (Vec2{2, 2}));
  EXPECT_EQ(p.points.back(), (Vec2{0, 0}));
}

TEST(DiscretePath, CostIdentityOnRandomScenes) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> eta(0.0, 5.0);
  for (int t = 0; t < 50; ++t) {
    hjplace::testing::RandomSceneSpec spec;
    spec.n = 10;
    const GridWorld w = random_world(rng, spec);
    const Vec2 dest = hjplace::testing::random_free_point(rng, w);
    const auto f = grid_dijkstra(w, dest, eta(rng));
    for (int k = 0; k < 5; ++k) {
      const Vec2 start = hjplace::testing::random_free_point(rng, w);
      if (!std::isfinite(f.at(start))) {
        EXPECT_THROW(extract_path_discrete(f, start), UnreachableError);
        continue;
      }
      const auto p = extract_path_discrete(f, start);
      ASSERT_EQ(p.total_time, f.at(start));
      for (std::size_t i = 0; i < p.segments(); ++i) {
        ASSERT_NEAR(p.segment_length(i), w.grid().h, 1e-12);
      }
      for (const auto& q : p.points) ASSERT_FALSE(w.obstacles().blocked_at(q));
      // u strictly decreases along the chain
      for (std::size_t i = 1; i < p.points.size(); ++i) {
        ASSERT_LT(f.at(p.points[i]), f.at(p.points[i - 1]));
      }
    }
  }
}

TEST(DiscretePath, AvoidsCameraWhenDetourExists) {
  // a narrow wedge watches the west half of the bottom corridor; the oracle
  // enumerates every simple path
  Scene s = unit_scene(5);
  s.obstacles.push_back(CellObstacle{{{1, 1}, {2, 1}, {3, 1}}});
  s.cameras.push_back(wedge({2, 0}, 3 * std::numbers::pi / 2 - 0.01, 0.02));
  const GridWorld w(s, 5, 5);
  const double eta = 10.0;
  const Vec2 start{0, 0};
  const Vec2 dest{4, 0};
  const auto f = grid_dijkstra(w, dest, eta);

  double best = std::numeric_limits<double>::infinity();
  std::size_t best_seen = 0;
  oracle::enumerate_simple_paths(w, w.grid().nearest_index(start), w.grid().nearest_index(dest),
                                 [&](const std::vector<std::size_t>& chain) {
                                   double cost = 0.0;
                                   std::size_t seen = 0;
                                   for (std::size_t i = 1; i < chain.size(); ++i) {
                                     const Vec2 mid = (w.grid().position(chain[i - 1]) + w.grid().position(chain[i])) / 2.0;
                                     const bool v = oracle::visible(w.cameras(), mid, w.obstacles());
                                     cost += 1.0 + (v ? eta : 0.0);
                                     seen += v ? 1 : 0;
                                   }
                                   if (cost < best) {
                                     best = cost;
                                     best_seen = seen;
                                   }
                                 });
  EXPECT_EQ(best_seen, 0u);
  EXPECT_DOUBLE_EQ(f.at(start), best);
  const auto p = extract_path_discrete(f, start);
  EXPECT_EQ(in_scope_edges(w, p), 0u);
  EXPECT_GT(p.length(), 4.0);
}

TEST(DiscretePath, RequiresGraphField) {
  const GridWorld w(unit_scene(4), 4, 4);
  const auto f = ordered_upwind(w, WindField::zero(w.grid(), {0, 0}), {0, 0});
  EXPECT_THROW(extract_path_discrete(f, {3, 3}), ValidationError);
}

TEST(CharacteristicPath, StraightLineWithoutCameras) {
  Scene s;
  s.region = {0.0, 10.0, 0.0, 10.0};
  const GridWorld w(s, 41, 41);
  const Vec2 dest{8.0, 7.5};
  const auto zero = WindField::zero(w.grid(), dest);
  const auto f = ordered_upwind(w, zero, dest);
  for (const Vec2 start : {Vec2{1.0, 1.0}, Vec2{0.5, 9.0}, Vec2{8.0, 0.5}}) {
    const auto p = extract_path_characteristic(f, zero, w, start, w.grid().h / 2);
    const double d = distance(start, dest);
    EXPECT_NEAR(p.length(), d, 0.05 * d);
    EXPECT_NEAR(p.total_time, d, 0.05 * d);
    EXPECT_EQ(p.points.front(), start);
    EXPECT_LE(distance(p.points.back(), dest), w.grid().h);
    for (std::size_t i = 0; i + 1 < p.segments(); ++i) EXPECT_LE(p.segment_length(i), w.grid().h / 2 + 1e-12);
    EXPECT_LE(p.segment_length(p.segments() - 1), w.grid().h + 1e-12);  // final hop onto the destination
  }
}

TEST(CharacteristicPath, StartAtDestination) {
  const GridWorld w(unit_scene(5), 5, 5);
  const auto zero = WindField::zero(w.grid(), {2, 2});
  const auto f = ordered_upwind(w, zero, {2, 2});
  const auto p = extract_path_characteristic(f, zero, w, {2, 2}, 0.5);
  EXPECT_EQ(p.points.size(), 1u);
  EXPECT_EQ(p.total_time, 0.0);
}

TEST(CharacteristicPath, ValueDescentAndObstacleAvoidance) {
  std::mt19937_64 rng(37);
  int done = 0;
  for (int t = 0; t < 30 && done < 10; ++t) {
    hjplace::testing::RandomSceneSpec spec;
    spec.n = 24;
    spec.max_cameras = 0;
    spec.max_rect_side = 6.0;
    const GridWorld w = random_world(rng, spec);
    const Vec2 dest = hjplace::testing::random_free_point(rng, w);
    const Vec2 start = hjplace::testing::random_free_point(rng, w);
    const auto zero = WindField::zero(w.grid(), dest);
    const auto f = ordered_upwind(w, zero, dest);
    if (!std::isfinite(f.at(start)) || distance(start, dest) < 3.0) continue;
    Path p;
    try {
      p = extract_path_characteristic(f, zero, w, start, 0.5);
    } catch (const NonConvergenceError& e) {
      for (const auto& q : e.partial().points) ASSERT_FALSE(w.obstacles().blocked_at(q));
      continue;
    }
    ++done;
    const double u0 = f.at(start);
    for (const auto& q : p.points) ASSERT_FALSE(w.obstacles().blocked_at(q));
    for (std::size_t i = 1; i + 1 < p.points.size(); ++i) {
      ASSERT_LT(interpolate_value(f, p.points[i]), interpolate_value(f, p.points[i - 1]) + 1e-9 * u0);
    }
  }
  EXPECT_GE(done, 5);
}

TEST(CharacteristicPath, TimeConsistencyOnEmptyScenes) {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 5; ++t) {
    hjplace::testing::RandomSceneSpec spec;
    spec.n = 40;
    spec.max_cameras = 0;
    spec.max_rect_side = 8.0;
    const GridWorld w = random_world(rng, spec);
    const Vec2 dest = hjplace::testing::random_free_point(rng, w);
    Vec2 start = hjplace::testing::random_free_point(rng, w);
    const auto zero = WindField::zero(w.grid(), dest);
    const auto f = ordered_upwind(w, zero, dest);
    if (!std::isfinite(f.at(start)) || start == dest) continue;
    const auto p = extract_path_characteristic(f, zero, w, start, w.grid().h / 2);
    EXPECT_LE(std::abs(p.total_time - f.at(start)) / f.at(start), 0.1);
  }
}

TEST(CharacteristicPath, ValidatesInputs) {
  Scene s = unit_scene(9);
  s.obstacles.push_back(RectObstacle{3, 5, 0, 6});  // gap along the top row
  const GridWorld w(s, 9, 9);
  const auto zero = WindField::zero(w.grid(), {8, 4});
  const auto f = ordered_upwind(w, zero, {8, 4});
  EXPECT_THROW(extract_path_characteristic(f, zero, w, {0, 0}, 2.0), ValidationError);
  EXPECT_THROW(extract_path_characteristic(f, zero, w, {4, 4}, 0.5), ValidationError);

  DescentOptions tight;
  tight.max_steps = 3;
  try {
    extract_path_characteristic(f, zero, w, {0, 0}, 0.5, tight);
    FAIL() << "expected non-convergence";
  } catch (const NonConvergenceError& e) {
    EXPECT_EQ(e.partial().points.size(), 4u);
    EXPECT_EQ(e.partial().points.front(), (Vec2{0, 0}));
  }
}

TEST(CharacteristicPath, UnreachableStart) {
  Scene s = unit_scene(7);
  s.obstacles.push_back(RectObstacle{3, 3, 0, 6});
  const GridWorld w(s, 7, 7);
  const auto zero = WindField::zero(w.grid(), {6, 3});
  const auto f = ordered_upwind(w, zero, {6, 3});
  EXPECT_THROW(extract_path_characteristic(f, zero, w, {0, 3}, 0.5), UnreachableError);
}

TEST(Annotate, NoCamerasAndFullCircle) {
  Path p;
  p.points = {{0, 0}, {1, 0}, {2, 0}, {2, 1}};
  const GridWorld none(unit_scene(4), 4, 4);
  const auto a = annotate_visibility(p, none);
  EXPECT_EQ(a.visible_fraction, 0.0);
  EXPECT_EQ(a.in_scope_segments(), 0u);

  Scene s = unit_scene(4);
  s.cameras.push_back(wedge({3, 3}, 0.0, kTwoPi));
  const auto b = annotate_visibility(p, GridWorld(s, 4, 4));
  EXPECT_EQ(b.visible_fraction, 1.0);
  EXPECT_EQ(b.in_scope_segments(), 3u);
}

TEST(Annotate, HalfCoveredCorridor) {
  // narrow wedge looking east along the corridor axis
  Scene s;
  s.region = {0.0, 10.0, 0.0, 2.0};
  s.cameras.push_back(wedge({0, 1}, std::numbers::pi / 2 - 0.1, 0.2));
  const GridWorld w(s, GridSpec{41, 9, 0.25, {0.0, 0.0}});
  Path p;
  for (int i = 0; i <= 40; ++i) p.points.push_back({0.25 * i, 1.0});
  const auto a = annotate_visibility(p, w);
  EXPECT_EQ(a.visible_fraction, 1.0);

  Scene half = s;
  half.obstacles.push_back(RectObstacle{5.125, 5.375, 0.0, 2.0});
  const GridWorld hw(half, GridSpec{41, 9, 0.25, {0.0, 0.0}});
  Path q;
  for (int i = 0; i <= 20; ++i) q.points.push_back({0.25 * i, 1.0});
  for (int i = 22; i <= 40; ++i) q.points.push_back({0.25 * i, 1.0});
  const auto b = annotate_visibility(q, hw);
  const double quantum = 0.5 / q.length();
  EXPECT_NEAR(b.visible_fraction, 0.5, quantum + 1e-12);
}

TEST(Smoothing, ShortcutsUnseenChains) {
  const GridWorld w(unit_scene(6), 6, 6);
  const auto f = grid_dijkstra(w, {5, 5}, 1.0);
  const auto p = extract_path_discrete(f, {0, 0});
  const auto sm = smooth_path(p, w, 1.0);
  ASSERT_EQ(sm.points.size(), 2u);
  EXPECT_NEAR(sm.total_time, 5.0 * std::numbers::sqrt2, 1e-12);

  Scene s = unit_scene(6);
  s.obstacles.push_back(RectObstacle{2, 3, 2, 3});
  const GridWorld blocked(s, 6, 6);
  const auto pb = extract_path_discrete(grid_dijkstra(blocked, {5, 5}, 1.0), {0, 0});
  const auto sb = smooth_path(pb, blocked, 1.0);
  EXPECT_GT(sb.points.size(), 2u);
  EXPECT_LT(sb.length(), pb.length());
  for (std::size_t i = 0; i < sb.segments(); ++i) {
    EXPECT_TRUE(line_of_sight(blocked.obstacles(), sb.points[i], sb.points[i + 1]));
  }
}

TEST(Tradeoff, InScopeEdgesShrinkWithEta) {
  const GridWorld w(hjplace::testing::tradeoff_scene(), 20, 20);
  std::size_t previous = std::numeric_limits<std::size_t>::max();
  std::size_t first = 0;
  std::size_t last = 0;
  for (const double eta : hjplace::testing::kTradeoffEtas) {
    const auto f = grid_dijkstra(w, hjplace::testing::kTradeoffDest, eta);
    const auto n = in_scope_edges(w, extract_path_discrete(f, hjplace::testing::kTradeoffStart));
    EXPECT_LE(n, previous) << "eta " << eta;
    if (previous == std::numeric_limits<std::size_t>::max()) first = n;
    previous = last = n;
  }
  EXPECT_LT(last, first);
}
