#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ippo/geometry.hpp"

namespace ippo {

/// Planar fixed-wing pose. Speed is constant for a whole episode.
struct UavState {
  Vec2 position;
  double yaw = 0.0;  // (-pi, pi]
  double speed = 30.0;
};

struct ObstacleField {
  std::vector<Circle> circles;
  std::vector<Box> boxes;
  Box bounds{{-1.0e4, -1.0e4}, {1.0e4, 1.0e4}};

  /// True if `p` lies strictly inside any circle or box.
  bool collides(Vec2 p) const;
  /// First obstacle boundary hit along the ray, capped at `max_range`.
  double ray_distance(Vec2 origin, double angle, double max_range) const;
};

struct ScenarioSpec {
  ObstacleField field;
  Vec2 start;
  double start_yaw = 0.0;
  Vec2 target;
  double capture_radius = 30.0;
  double d_max = 1300.0;
  int max_steps = 60;
};

/// Parses the line-oriented scenario format and validates the result.
/// Throws ParseError (with line number) or ValidationError.
ScenarioSpec load_scenario(std::string_view text);
ScenarioSpec load_scenario_file(const std::filesystem::path& path);
/// Writes the scenario back out; load_scenario(serialize_scenario(s)) == s.
std::string serialize_scenario(const ScenarioSpec& spec);
/// Throws ValidationError naming the first violated invariant.
void validate_scenario(const ScenarioSpec& spec);

struct KinematicParams {
  double dt = 0.1;
  double max_turn_rate = 0.327;  // rad/s, 45 deg bank at 30 m/s
  double waypoint_tolerance = 10.0;
  int max_substeps = 200;
};

struct SubStep {
  Vec2 position;
  double yaw = 0.0;
};

struct StepEvents {
  bool collided = false;
  bool reached_target = false;
  bool exceeded_cap = false;
  bool out_of_bounds = false;
  std::vector<SubStep> sub_path;

  bool terminal() const {
    return collided || reached_target || exceeded_cap || out_of_bounds;
  }
};

struct StepResult {
  UavState state;
  StepEvents events;
};

/// Flies turn-rate-limited pure pursuit toward `waypoint` until it is within
/// the capture tolerance, a terminal event fires, or the sub-step cap is hit.
/// Events are checked after every sub-step, collision first.
StepResult step_to_waypoint(const UavState& state, Vec2 waypoint,
                            const ScenarioSpec& scenario,
                            const KinematicParams& kin);

/// Geometric termination test. `decision_steps` counts completed decisions
/// in the episode and trips the step cap at `scenario.max_steps`.
StepEvents check_termination(const UavState& state,
                             const ScenarioSpec& scenario,
                             int decision_steps);

struct SensorParams {
  int height = 16;
  int width = 32;
  double horizontal_fov = 2.0 * std::numbers::pi / 3.0;
  double vertical_fov = std::numbers::pi / 4.0;
  double max_range = 400.0;

  void validate() const;
  /// Azimuth of column `col` relative to the body x axis; column 0 is the
  /// leftmost (positive) offset, offsets sit at uniform cell centers.
  double azimuth_offset(int col) const;
};

class DepthMap {
 public:
  DepthMap(SensorParams sensor, std::vector<double> values);

  int height() const { return sensor_.height; }
  int width() const { return sensor_.width; }
  const SensorParams& sensor() const { return sensor_; }
  double at(int row, int col) const {
    return values_[static_cast<std::size_t>(row * sensor_.width + col)];
  }
  const std::vector<double>& values() const { return values_; }
  /// Values divided by max_range, in (0, 1].
  std::vector<double> normalized() const;

 private:
  SensorParams sensor_;
  std::vector<double> values_;
};

/// Ray-cast range image. The world is planar, so every row repeats the
/// azimuth sweep.
DepthMap raycast_depth(const UavState& state, const ObstacleField& field,
                       const SensorParams& sensor);

}  // namespace ippo
