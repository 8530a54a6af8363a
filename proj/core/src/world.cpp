#include "ippo/world.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ippo/errors.hpp"

namespace ippo {

bool ObstacleField::collides(Vec2 p) const {
  for (const auto& c : circles) {
    if (c.contains(p)) return true;
  }
  for (const auto& b : boxes) {
    if (b.contains(p)) return true;
  }
  return false;
}

double ObstacleField::ray_distance(Vec2 origin, double angle,
                                   double max_range) const {
  const Vec2 dir = unit_from_angle(angle);
  double best = max_range;
  for (const auto& c : circles) {
    if (auto t = ray_intersect(origin, dir, c); t && *t < best) best = *t;
  }
  for (const auto& b : boxes) {
    if (auto t = ray_intersect(origin, dir, b); t && *t < best) best = *t;
  }
  return best;
}

StepEvents check_termination(const UavState& state,
                             const ScenarioSpec& scenario,
                             int decision_steps) {
  StepEvents ev;
  const Vec2 p = state.position;
  ev.collided = scenario.field.collides(p);
  ev.reached_target = distance(p, scenario.target) <= scenario.capture_radius;
  ev.exceeded_cap = distance(p, scenario.target) > scenario.d_max ||
                    decision_steps >= scenario.max_steps;
  ev.out_of_bounds = !scenario.field.bounds.contains(p);
  return ev;
}

StepResult step_to_waypoint(const UavState& state, Vec2 waypoint,
                            const ScenarioSpec& scenario,
                            const KinematicParams& kin) {
  if (!std::isfinite(waypoint.x) || !std::isfinite(waypoint.y) ||
      !std::isfinite(state.position.x) || !std::isfinite(state.position.y) ||
      !std::isfinite(state.yaw)) {
    throw ValidationError("step_to_waypoint: non-finite coordinates");
  }

  StepResult out{state, {}};
  UavState& s = out.state;
  StepEvents& ev = out.events;
  const double max_turn = kin.max_turn_rate * kin.dt;
  const double stride = s.speed * kin.dt;

  for (int k = 0; k < kin.max_substeps; ++k) {
    if (distance(s.position, waypoint) <= kin.waypoint_tolerance) break;

    const Vec2 to_wp = waypoint - s.position;
    const double error = wrap_angle(std::atan2(to_wp.y, to_wp.x) - s.yaw);
    const double turn = std::clamp(error, -max_turn, max_turn);
    // Chord of the constant-rate arc: exact direction, length speed * dt.
    const double chord_heading = s.yaw + 0.5 * turn;
    s.position = s.position + unit_from_angle(chord_heading) * stride;
    s.yaw = wrap_angle(s.yaw + turn);
    ev.sub_path.push_back({s.position, s.yaw});

    const Vec2 p = s.position;
    if (scenario.field.collides(p)) {
      ev.collided = true;
      break;
    }
    const double to_target = distance(p, scenario.target);
    if (to_target <= scenario.capture_radius) {
      ev.reached_target = true;
      break;
    }
    if (!scenario.field.bounds.contains(p)) {
      ev.out_of_bounds = true;
      break;
    }
    if (to_target > scenario.d_max) {
      ev.exceeded_cap = true;
      break;
    }
  }
  return out;
}

void SensorParams::validate() const {
  if (height < 1 || width < 1) {
    throw ValidationError("sensor: height and width must be >= 1");
  }
  const double pi = std::numbers::pi;
  if (!(horizontal_fov > 0.0 && horizontal_fov < pi)) {
    throw ValidationError("sensor: horizontal fov must be in (0, pi)");
  }
  if (!(vertical_fov > 0.0 && vertical_fov < pi)) {
    throw ValidationError("sensor: vertical fov must be in (0, pi)");
  }
  if (!(max_range > 0.0) || !std::isfinite(max_range)) {
    throw ValidationError("sensor: max_range must be > 0");
  }
}

double SensorParams::azimuth_offset(int col) const {
  const double u = (static_cast<double>(col) + 0.5) / width;
  return horizontal_fov * (0.5 - u);
}

DepthMap::DepthMap(SensorParams sensor, std::vector<double> values)
    : sensor_(sensor), values_(std::move(values)) {
  sensor_.validate();
  if (values_.size() != static_cast<std::size_t>(sensor_.height) *
                            static_cast<std::size_t>(sensor_.width)) {
    throw ShapeError("depth map: value count does not match H x W");
  }
}

std::vector<double> DepthMap::normalized() const {
  std::vector<double> out(values_.size());
  const double inv = 1.0 / sensor_.max_range;
  std::transform(values_.begin(), values_.end(), out.begin(),
                 [inv](double v) { return v * inv; });
  return out;
}

DepthMap raycast_depth(const UavState& state, const ObstacleField& field,
                       const SensorParams& sensor) {
  sensor.validate();
  const auto w = static_cast<std::size_t>(sensor.width);
  std::vector<double> sweep(w);
  for (std::size_t j = 0; j < w; ++j) {
    const double angle = state.yaw + sensor.azimuth_offset(static_cast<int>(j));
    const double range =
        field.ray_distance(state.position, angle, sensor.max_range);
    sweep[j] = std::clamp(range, 1e-9, sensor.max_range);
  }
  std::vector<double> values;
  values.reserve(w * static_cast<std::size_t>(sensor.height));
  for (int i = 0; i < sensor.height; ++i) {
    values.insert(values.end(), sweep.begin(), sweep.end());
  }
  return DepthMap(sensor, std::move(values));
}

}  // namespace ippo
