#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "hjplace/windfield.hpp"
#include "support/oracles.hpp"
#include "support/scenes.hpp"

using namespace hjplace;
using hjplace::testing::random_world;
using hjplace::testing::unit_scene;

namespace {

Camera full_camera(Vec2 p, double falloff = 2.0) {
  Camera c;
  c.position = p;
  c.falloff_exponent = falloff;
  return c;
}

}  // namespace

TEST(WindField, NoCamerasGivesZeroField) {
  const GridWorld w(unit_scene(8), 8, 8);
  const auto f = build_wind_field(w, {7, 7});
  for (const auto& v : f.vectors()) {
    EXPECT_EQ(v.x, 0.0);
    EXPECT_EQ(v.y, 0.0);
  }
  EXPECT_EQ(f.max_magnitude(), 0.0);
}

TEST(WindField, SingleCameraInverseSquare) {
  Scene s = unit_scene(10);
  s.base_speed = 10.0;
  s.cameras.push_back(full_camera({2, 4}));
  const GridWorld w(s, 10, 10);
  const auto f = build_wind_field(w, {9, 4});
  const Vec2 x{4, 4};
  const Vec2 v = f.at(w.grid().nearest_index(x));
  EXPECT_DOUBLE_EQ(norm(v), 0.25);
  EXPECT_DOUBLE_EQ(v.x, -0.25);  // pushes away from the destination at (9, 4)
  EXPECT_DOUBLE_EQ(v.y, 0.0);
}

TEST(WindField, OverlappingCamerasAdd) {
  Scene s = unit_scene(10);
  s.base_speed = 10.0;
  s.cameras.push_back(full_camera({3, 4}));
  s.cameras.push_back(full_camera({4, 6}));
  const GridWorld w(s, 10, 10);
  const auto f = build_wind_field(w, {9, 9});
  EXPECT_DOUBLE_EQ(norm(f.at(w.grid().index(4, 4))), 1.25);
}

TEST(WindField, ZeroAtDestinationAndCappedAtCamera) {
  Scene s = unit_scene(6);
  s.cameras.push_back(full_camera({2, 2}));
  const GridWorld w(s, 6, 6);
  const auto f = build_wind_field(w, {3, 2});
  EXPECT_EQ(norm(f.at(w.grid().index(3, 2))), 0.0);
  EXPECT_DOUBLE_EQ(norm(f.at(w.grid().index(2, 2))), 0.95);
  EXPECT_DOUBLE_EQ(norm(f.at(w.grid().index(2, 3))), 0.95);  // 1/1² clamps to the cap
}

TEST(WindField, CapEpsilonIsConfigurable) {
  Scene s = unit_scene(6);
  s.cameras.push_back(full_camera({2, 2}));
  const GridWorld w(s, 6, 6);
  EXPECT_DOUBLE_EQ(build_wind_field(w, {5, 5}, {0.2}).max_magnitude(), 0.8);
  EXPECT_THROW(build_wind_field(w, {5, 5}, {0.0}), ConfigurationError);
  EXPECT_THROW(build_wind_field(w, {5, 5}, {1.0}), ConfigurationError);
}

TEST(WindField, DestinationOnObstacleRejected) {
  Scene s = unit_scene(6);
  s.obstacles.push_back(RectObstacle{2, 3, 2, 3});
  const GridWorld w(s, 6, 6);
  EXPECT_THROW(build_wind_field(w, {2, 2}), ValidationError);
  EXPECT_THROW(build_wind_field(w, {9, 2}), ValidationError);
}

class WindInvariants : public ::testing::TestWithParam<int> {};

TEST_P(WindInvariants, HoldOnRandomScenes) {
  std::mt19937_64 rng(100 + GetParam());
  const GridWorld w = random_world(rng);
  const Vec2 dest = hjplace::testing::random_free_point(rng, w);
  const WindOptions opts{};
  const auto f = build_wind_field(w, dest, opts);
  const auto& g = w.grid();
  const std::size_t di = g.nearest_index(dest);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec2 v = f.at(i);
    const Vec2 x = g.position(i);
    const bool seen = !w.blocked(i) && oracle::visible(w.cameras(), x, w.obstacles());
    if (!seen || i == di) {
      EXPECT_EQ(v.x, 0.0);
      EXPECT_EQ(v.y, 0.0);
      continue;
    }
    const Vec2 to_dest = g.position(di) - x;
    const double m = norm(v);
    EXPECT_NEAR(dot(v, to_dest), -m * norm(to_dest), 1e-12 * m * norm(to_dest));
    EXPECT_GE(w.base_speed() - m, opts.cap_epsilon * w.base_speed() - 1e-15);
  }
}

TEST_P(WindInvariants, SuperpositionOfTwoCameras) {
  std::mt19937_64 rng(200 + GetParam());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Scene s = unit_scene(12);
  s.base_speed = 50.0;  // keeps the cap inactive away from the cameras
  s.obstacles.push_back(RectObstacle{5.0, 6.0, 0.0, 3.0});
  const auto raster = ObstacleRaster::rasterize(GridSpec::covering(s.region, 12, 12), s.obstacles);
  const auto draw = [&] {
    for (;;) {
      Camera c = full_camera({1.0 + 9 * u(rng), 1.0 + 9 * u(rng)});
      c.opening = 1.0 + 5.0 * u(rng);
      c.beta = kTwoPi * u(rng);
      if (!raster.blocked_at(c.position) && !obstacle_contains(s.obstacles[0], c.position)) return c;
    }
  };
  const Camera a = draw();
  const Camera b = draw();
  const Vec2 dest{11, 11};
  Scene sa = s;
  sa.cameras = {a};
  Scene sb = s;
  sb.cameras = {b};
  Scene sab = s;
  sab.cameras = {a, b};
  const GridWorld wa(sa, 12, 12), wb(sb, 12, 12), wab(sab, 12, 12);
  const auto fa = build_wind_field(wa, dest), fb = build_wind_field(wb, dest),
             fab = build_wind_field(wab, dest);
  const double cap = 0.95 * s.base_speed;
  for (std::size_t i = 0; i < wab.grid().size(); ++i) {
    const Vec2 sum = fa.at(i) + fb.at(i);
    if (norm(sum) >= cap) {
      EXPECT_NEAR(norm(fab.at(i)), cap, 1e-12);
    } else {
      EXPECT_NEAR(fab.at(i).x, sum.x, 1e-12);
      EXPECT_NEAR(fab.at(i).y, sum.y, 1e-12);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, WindInvariants, ::testing::Range(0, 12));

TEST(WindField, UniformFalloffExponentZero) {
  Scene s = unit_scene(6);
  s.cameras.push_back(full_camera({0, 0}, 0.0));
  const GridWorld w(s, 6, 6);
  const auto f = build_wind_field(w, {5, 5});
  for (std::size_t i = 0; i < w.grid().size(); ++i) {
    if (i == w.grid().index(5, 5)) continue;
    EXPECT_DOUBLE_EQ(norm(f.at(i)), 0.95);  // 1/d⁰ = 1, clamped
  }
}

TEST(WindField, CsvDumpIsRowMajor) {
  Scene s = unit_scene(3);
  s.cameras.push_back(full_camera({0, 0}));
  const GridWorld w(s, 3, 3);
  std::ostringstream os;
  write_wind_csv(os, build_wind_field(w, {2, 2}));
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "x,y,wx,wy");
  int rows = 0;
  std::getline(is, line);
  EXPECT_EQ(line.rfind("0,0,", 0), 0u);
  ++rows;
  std::getline(is, line);
  EXPECT_EQ(line.rfind("1,0,", 0), 0u);
  ++rows;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 9);
}
