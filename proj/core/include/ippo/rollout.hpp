#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ippo/environment.hpp"
#include "ippo/networks.hpp"
#include "ippo/random.hpp"
#include "ippo/trainer_config.hpp"

namespace ippo {

struct Transition {
  std::vector<double> state;  // 256 entries
  int action = 0;
  double log_prob_old = 0.0;
  RewardBreakdown reward;
  double value_old = 0.0;
  bool done = false;
  bool success_episode = false;
  double heading_change = 0.0;  // |wrapped yaw change| over the step
  /// Normalised depth image and goal features; kept only for encoder
  /// fine-tuning.
  std::vector<double> depth;
  TargetFeatures target;
};

/// One row of a trajectory dump.
struct TrajectoryRow {
  int step = 0;
  int substep = 0;
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
  int action = -1;
  RewardBreakdown reward;
};

struct EpisodeResult {
  std::vector<Transition> transitions;
  bool success = false;
  double total_reward = 0.0;
  double smoothness = 0.0;  // mean |heading change| per decision, radians
  std::vector<TrajectoryRow> trajectory;
};

enum class ActionSelection {
  kSample,   // inverse-CDF draw from the policy
  kGreedy,   // argmax
  kUniform,  // uniformly random, ignores the policy
};

struct RolloutOptions {
  ActionSelection selection = ActionSelection::kSample;
  bool keep_depth = false;
  bool record_trajectory = false;
};

/// Inverse-CDF sample from an 8-way distribution with one uniform draw.
int sample_action(const ActionDistribution& dist, double u);

/// Resets `env` and runs one episode to termination.
EpisodeResult collect_episode(Environment& env, const NetworkParameters& params,
                              Rng& rng, const RolloutOptions& options = {});

struct EpisodeSummary {
  std::size_t first = 0;  // index of first transition
  std::size_t length = 0;
  bool success = false;
  double total_reward = 0.0;
  double smoothness = 0.0;
};

struct RolloutBuffer {
  std::vector<Transition> transitions;
  std::vector<EpisodeSummary> episodes;
  int successes = 0;  // M_s
  std::vector<double> returns;
  std::vector<double> advantages;

  int episode_count() const { return static_cast<int>(episodes.size()); }
};

using EnvFactory = std::function<Environment()>;

struct BatchOptions {
  std::size_t batch_size = 2048;
  /// Stop after this many episodes even if the batch is short; 0 = no cap.
  std::size_t max_episodes = 0;
  /// Global index of the first episode; per-episode RNG streams derive from
  /// (seed, index), so results do not depend on the worker count.
  std::uint64_t first_episode = 0;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  RolloutOptions rollout;
};

/// Collects whole episodes until at least `batch_size` transitions, then
/// fills returns and advantages per `config`.
RolloutBuffer collect_batch(const EnvFactory& make_env,
                            const NetworkParameters& params,
                            const BatchOptions& options,
                            const TrainerConfig& config);

/// Fills `returns` and `advantages` from rewards and stored critic values.
void compute_targets(RolloutBuffer& buffer, const TrainerConfig& config);

/// Shifts and scales advantages to zero mean and unit population std.
/// No-op when the std is below 1e-8.
void normalize_advantages(RolloutBuffer& buffer);

}  // namespace ippo
