#include "ippo/geometry.hpp"

#include <algorithm>
#include <limits>

namespace ippo {

double wrap_angle(double angle) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double wrapped = std::fmod(angle, kTwoPi);
  if (wrapped <= -std::numbers::pi) {
    wrapped += kTwoPi;
  } else if (wrapped > std::numbers::pi) {
    wrapped -= kTwoPi;
  }
  return wrapped;
}

bool Circle::contains(Vec2 p) const {
  const Vec2 d = p - center;
  return d.dot(d) < radius * radius;
}

bool Box::contains(Vec2 p) const {
  return p.x > min.x && p.x < max.x && p.y > min.y && p.y < max.y;
}

bool Box::contains(const Box& other) const {
  return other.min.x >= min.x && other.min.y >= min.y &&
         other.max.x <= max.x && other.max.y <= max.y;
}

std::optional<double> ray_intersect(Vec2 origin, Vec2 direction,
                                    const Circle& circle) {
  const Vec2 oc = circle.center - origin;
  const double b = direction.dot(oc);
  const double c = oc.dot(oc) - circle.radius * circle.radius;
  const double disc = b * b - c;
  if (disc < 0.0) return std::nullopt;
  const double root = std::sqrt(disc);
  const double near = b - root;
  if (near > 0.0) return near;
  const double far = b + root;
  if (far > 0.0) return far;
  return std::nullopt;
}

std::optional<double> ray_intersect(Vec2 origin, Vec2 direction,
                                    const Box& box) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  double t_enter = -kInf;
  double t_exit = kInf;

  const double o[2] = {origin.x, origin.y};
  const double d[2] = {direction.x, direction.y};
  const double lo[2] = {box.min.x, box.min.y};
  const double hi[2] = {box.max.x, box.max.y};
  for (int axis = 0; axis < 2; ++axis) {
    if (d[axis] == 0.0) {
      if (o[axis] < lo[axis] || o[axis] > hi[axis]) return std::nullopt;
      continue;
    }
    double t0 = (lo[axis] - o[axis]) / d[axis];
    double t1 = (hi[axis] - o[axis]) / d[axis];
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
  }
  if (t_enter > t_exit) return std::nullopt;
  if (t_enter > 0.0) return t_enter;
  if (t_exit > 0.0) return t_exit;
  return std::nullopt;
}

}  // namespace ippo
