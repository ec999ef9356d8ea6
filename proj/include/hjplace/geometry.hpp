#pragma once

#include <cmath>
#include <numbers>

namespace hjplace {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
  friend constexpr bool operator==(Vec2 a, Vec2 b) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(b - a); }

/// Unit vector along `a`; the zero vector maps to itself.
inline Vec2 normalized(Vec2 a) {
  const double n = norm(a);
  return n > 0.0 ? a / n : Vec2{};
}

/// Wraps an angle into [0, 2π).
inline double wrap_angle(double angle) {
  double r = std::fmod(angle, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a tiny negative number can round back up to 2π
  if (r >= kTwoPi) r = 0.0;
  return r;
}

/// Heading of `v` measured clockwise from north (+y), in [0, 2π).
inline double compass_heading(Vec2 v) { return wrap_angle(std::atan2(v.x, v.y)); }

}  // namespace hjplace
