#pragma once

#include <array>
#include <numbers>
#include <optional>
#include <vector>

#include "ippo/networks.hpp"
#include "ippo/world.hpp"

namespace ippo {

/// Normalised goal features: distance in [0, 1], bearing in [-1, 1].
struct TargetFeatures {
  double distance = 0.0;
  double bearing = 0.0;
};

/// d = clip(|target - ego| / d_max, 0, 1); alpha = atan2(dy, dx) / pi.
/// Coincident points give (0, 0).
TargetFeatures target_features(Vec2 ego, Vec2 target, double d_max);

/// Yaw change for each action index. Index 0 ("continue") has no entry of its
/// own; it reuses the previous waypoint, or flies straight on the first step.
inline constexpr std::array<double, kActionCount> kYawDeltas = {
    0.0,
    0.0,
    std::numbers::pi / 6.0,
    -std::numbers::pi / 6.0,
    std::numbers::pi / 4.0,
    -std::numbers::pi / 4.0,
    std::numbers::pi / 3.0,
    -std::numbers::pi / 3.0,
};
inline constexpr int kContinueAction = 0;

/// World-frame waypoint for `action`: lambda * (cos dyaw, sin dyaw) in the
/// body frame, rotated by yaw and offset by position.
Vec2 action_to_waypoint(int action, const UavState& state,
                        std::optional<Vec2> last_waypoint, double lambda);

struct RewardWeights {
  double target = 30.0;     // C1
  double collision = -30.0; // C2
  double distance = 0.5;    // C3
  double track = 1.0;       // C4

  static RewardWeights distance_only() { return {0.0, 0.0, 1.0, 0.0}; }
};

struct RewardBreakdown {
  double target = 0.0;
  double collision = 0.0;
  double distance = 0.0;
  double track = 0.0;
  double total = 0.0;
};

enum class TrackMode {
  /// Cosine between take-off-anchored vectors to the target and to the UAV.
  kLiteral,
  /// Cosine between the take-off -> target line and this step's displacement.
  kHeading,
};

/// Quantities the reward needs at one decision boundary.
struct StepContext {
  double d = 0.0;  // normalised distance to target
  Vec2 position;
  Vec2 takeoff;
  Vec2 target;
};

RewardBreakdown compute_reward(const StepContext& prev,
                               const StepContext& curr,
                               const StepEvents& events,
                               const RewardWeights& weights, TrackMode mode);

/// Alignment term in [-1, 1]; 0 when either vector has zero length.
double track_alignment(const StepContext& prev, const StepContext& curr,
                       TrackMode mode);

/// Latent depth features followed by (d, alpha); always 256 entries.
struct StateVector {
  std::vector<double> values;
};

StateVector build_state(const DepthMap& depth, const NetworkParameters& encoder,
                        const TargetFeatures& target);

}  // namespace ippo
