#pragma once

#include <optional>

#include "ippo/mdp.hpp"
#include "ippo/world.hpp"

namespace ippo {

struct EnvConfig {
  KinematicParams kinematics;
  SensorParams sensor;
  double waypoint_distance = 150.0;  // lambda, meters
  double airspeed = 30.0;
  RewardWeights weights;
  TrackMode track_mode = TrackMode::kLiteral;
};

struct StepOutcome {
  int action = 0;
  Vec2 waypoint;
  UavState before;
  UavState after;
  StepEvents events;
  RewardBreakdown reward;
  bool done = false;
};

/// One episode's worth of MDP state over a fixed scenario. Not thread-safe;
/// use one instance per worker.
class Environment {
 public:
  Environment(ScenarioSpec scenario, EnvConfig config);

  void reset();
  StepOutcome step(int action);

  DepthMap observe_depth() const;
  TargetFeatures observe_target() const;

  const UavState& uav() const { return uav_; }
  const ScenarioSpec& scenario() const { return scenario_; }
  const EnvConfig& config() const { return config_; }
  int decision_steps() const { return steps_; }
  /// Path length flown since reset, meters.
  double distance_flown() const { return flown_; }
  bool done() const { return done_; }

 private:
  StepContext context() const;

  ScenarioSpec scenario_;
  EnvConfig config_;
  UavState uav_;
  std::optional<Vec2> last_waypoint_;
  int steps_ = 0;
  double flown_ = 0.0;
  bool done_ = false;
};

}  // namespace ippo
