#include "ippo/environment.hpp"

#include "ippo/errors.hpp"

namespace ippo {

Environment::Environment(ScenarioSpec scenario, EnvConfig config)
    : scenario_(std::move(scenario)), config_(config) {
  validate_scenario(scenario_);
  config_.sensor.validate();
  if (!(config_.airspeed > 0.0)) throw ValidationError("airspeed must be > 0");
  reset();
}

void Environment::reset() {
  uav_ = UavState{scenario_.start, wrap_angle(scenario_.start_yaw),
                 config_.airspeed};
  last_waypoint_.reset();
  steps_ = 0;
  flown_ = 0.0;
  done_ = false;
}

StepContext Environment::context() const {
  return {target_features(uav_.position, scenario_.target, scenario_.d_max)
              .distance,
          uav_.position, scenario_.start, scenario_.target};
}

DepthMap Environment::observe_depth() const {
  return raycast_depth(uav_, scenario_.field, config_.sensor);
}

TargetFeatures Environment::observe_target() const {
  return target_features(uav_.position, scenario_.target, scenario_.d_max);
}

StepOutcome Environment::step(int action) {
  if (done_) throw Error("step() on a finished episode; call reset()");
  StepOutcome out;
  out.action = action;
  out.before = uav_;
  out.waypoint = action_to_waypoint(action, uav_, last_waypoint_,
                                    config_.waypoint_distance);
  if (distance(out.waypoint, uav_.position) <=
      config_.kinematics.waypoint_tolerance) {
    // A fixed-wing cannot loiter on a captured waypoint; it holds heading
    // for one hop instead.
    out.waypoint = action_to_waypoint(1, uav_, std::nullopt,
                                      config_.waypoint_distance);
  }
  const StepContext prev = context();

  StepResult result =
      step_to_waypoint(uav_, out.waypoint, scenario_, config_.kinematics);
  uav_ = result.state;
  last_waypoint_ = out.waypoint;
  ++steps_;
  out.after = uav_;
  out.events = std::move(result.events);
  flown_ += static_cast<double>(out.events.sub_path.size()) * uav_.speed *
            config_.kinematics.dt;
  if (!out.events.terminal() &&
      (steps_ >= scenario_.max_steps || flown_ > scenario_.d_max)) {
    out.events.exceeded_cap = true;
  }

  out.reward = compute_reward(prev, context(), out.events, config_.weights,
                              config_.track_mode);
  out.done = out.events.terminal();
  done_ = out.done;
  return out;
}

}  // namespace ippo
