#include "ippo/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ippo/errors.hpp"

namespace ippo {

TargetFeatures target_features(Vec2 ego, Vec2 target, double d_max) {
  const Vec2 delta = target - ego;
  if (delta.x == 0.0 && delta.y == 0.0) return {0.0, 0.0};
  return {std::clamp(delta.norm() / d_max, 0.0, 1.0),
          std::atan2(delta.y, delta.x) / std::numbers::pi};
}

Vec2 action_to_waypoint(int action, const UavState& state,
                        std::optional<Vec2> last_waypoint, double lambda) {
  if (action < 0 || action >= static_cast<int>(kActionCount)) {
    throw ValidationError("invalid action index " + std::to_string(action));
  }
  if (!(lambda > 0.0)) throw ValidationError("waypoint distance must be > 0");
  if (action == kContinueAction && last_waypoint) return *last_waypoint;

  const double dyaw = kYawDeltas[static_cast<std::size_t>(action)];
  const Vec2 body{lambda * std::cos(dyaw), lambda * std::sin(dyaw)};
  const double c = std::cos(state.yaw);
  const double s = std::sin(state.yaw);
  return {state.position.x + c * body.x - s * body.y,
          state.position.y + s * body.x + c * body.y};
}

namespace {

double cosine(Vec2 a, Vec2 b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

}  // namespace

double track_alignment(const StepContext& prev, const StepContext& curr,
                       TrackMode mode) {
  const Vec2 line = curr.target - curr.takeoff;
  switch (mode) {
    case TrackMode::kLiteral:
      return cosine(line, curr.position - curr.takeoff);
    case TrackMode::kHeading:
      return cosine(line, curr.position - prev.position);
  }
  return 0.0;
}

RewardBreakdown compute_reward(const StepContext& prev,
                               const StepContext& curr,
                               const StepEvents& events,
                               const RewardWeights& weights, TrackMode mode) {
  RewardBreakdown r;
  r.target = events.reached_target ? weights.target : 0.0;
  r.collision = events.collided ? weights.collision : 0.0;
  r.distance = weights.distance * (prev.d - curr.d);
  r.track = weights.track * track_alignment(prev, curr, mode);
  r.total = r.target + r.collision + r.distance + r.track;
  return r;
}

StateVector build_state(const DepthMap& depth, const NetworkParameters& encoder,
                        const TargetFeatures& target) {
  const NetworkConfig cfg = encoder.config();
  if (static_cast<std::size_t>(depth.height()) != cfg.depth_height ||
      static_cast<std::size_t>(depth.width()) != cfg.depth_width) {
    throw ShapeError("depth map " + std::to_string(depth.height()) + "x" +
                     std::to_string(depth.width()) +
                     " does not match encoder input " +
                     std::to_string(cfg.depth_height) + "x" +
                     std::to_string(cfg.depth_width));
  }
  StateVector s;
  s.values = encode_depth(encoder, depth.normalized());
  if (s.values.size() != kLatentDim) {
    throw ShapeError("encoder output must have 254 features");
  }
  s.values.push_back(target.distance);
  s.values.push_back(target.bearing);
  for (double v : s.values) {
    if (!std::isfinite(v)) throw NumericalError("non-finite state entry");
  }
  return s;
}

}  // namespace ippo
