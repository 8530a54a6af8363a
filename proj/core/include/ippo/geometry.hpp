#pragma once

#include <cmath>
#include <numbers>
#include <optional>

namespace ippo {

/// Planar vector in world meters.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr bool operator==(const Vec2&) const = default;

  constexpr double dot(Vec2 o) const { return x * o.x + y * o.y; }
  constexpr double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

inline Vec2 unit_from_angle(double angle) {
  return {std::cos(angle), std::sin(angle)};
}

/// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

struct Circle {
  Vec2 center;
  double radius = 0.0;

  /// Strict interior: points on the boundary are not inside.
  bool contains(Vec2 p) const;
};

/// Axis-aligned rectangle.
struct Box {
  Vec2 min;
  Vec2 max;

  bool contains(Vec2 p) const;
  bool contains(const Box& other) const;
  double area() const { return (max.x - min.x) * (max.y - min.y); }
};

// Smallest t > 0 with origin + t * direction on the shape boundary, if any.
// `direction` must be unit length.
std::optional<double> ray_intersect(Vec2 origin, Vec2 direction,
                                    const Circle& circle);
std::optional<double> ray_intersect(Vec2 origin, Vec2 direction,
                                    const Box& box);

}  // namespace ippo
