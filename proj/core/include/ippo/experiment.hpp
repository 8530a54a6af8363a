#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ippo/environment.hpp"
#include "ippo/inverse_ppo.hpp"
#include "ippo/networks.hpp"
#include "ippo/rollout.hpp"
#include "ippo/trainer_config.hpp"
#include "ippo/world.hpp"

namespace ippo {

/// Reconstruction pretraining of the depth autoencoder on maps gathered from
/// uniformly random flights.
struct PretrainConfig {
  int maps = 256;
  int steps = 60;
  int batch = 16;
  double learning_rate = 1e-3;
};

struct ExperimentConfig {
  std::filesystem::path scenario_path;
  ScenarioSpec scenario;
  EnvConfig env;
  TrainerConfig trainer;
  PretrainConfig pretrain;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "out";
  int eval_episodes = 100;
  ActionSelection eval_selection = ActionSelection::kGreedy;
  unsigned workers = 1;
  /// Save a checkpoint every this many episodes; 0 keeps only the final one.
  int checkpoint_every = 500;
  /// Fixed entropy coefficients compared against the adaptive scheme.
  std::vector<double> ablation_fixed_coeffs = {0.01, 0.001};
  /// Seeds used by `ablate`; empty means just `seed`.
  std::vector<std::uint64_t> ablation_seeds;
};

/// Per-episode training metrics, tagged with the report of the last epoch of
/// the update that consumed the episode.
struct EpisodeRow {
  int episode = 0;
  int steps = 0;
  double ret = 0.0;
  bool success = false;
  double smoothness = 0.0;
  LossReport loss;
};

struct TrainHooks {
  /// Called after each update with the number of episodes consumed so far.
  std::function<void(int episodes, const NetworkParameters&)> on_update;
};

struct TrainResult {
  NetworkParameters params;
  std::vector<EpisodeRow> rows;
  /// Set when an update hit a non-finite loss; rows up to that point kept.
  std::optional<std::string> abort_reason;
};

Environment make_environment(const ExperimentConfig& config);

/// Fresh network, encoder pretrained by reconstruction.
NetworkParameters pretrained_parameters(const ExperimentConfig& config);

/// Collect/update loop for `trainer.max_episodes` episodes. Starts from
/// `initial` when given, otherwise from pretrained_parameters(config).
TrainResult train(const ExperimentConfig& config,
                  const std::optional<NetworkParameters>& initial = {},
                  const TrainHooks& hooks = {});

struct EvalEpisode {
  int episode = 0;
  int steps = 0;
  double ret = 0.0;
  bool success = false;
  double smoothness = 0.0;
  std::vector<TrajectoryRow> trajectory;
};

struct EvalResult {
  std::vector<EvalEpisode> episodes;
  double success_rate = 0.0;
  double mean_smoothness = 0.0;
  double mean_return = 0.0;
};

EvalResult evaluate(const NetworkParameters& params,
                    const ExperimentConfig& config,
                    bool record_trajectories = false);

/// Mean return / success rate over the last `window` rows.
double tail_mean_return(const std::vector<EpisodeRow>& rows, std::size_t window);
double tail_success_rate(const std::vector<EpisodeRow>& rows,
                         std::size_t window);

struct RewardAblationRow {
  std::uint64_t seed = 0;
  EvalResult distance_only;
  EvalResult full;
};

std::vector<RewardAblationRow> reward_ablation(const ExperimentConfig& config);

struct EntropyVariant {
  std::string label;  // "fixed_0.01", "adaptive", ...
  EntropyMode mode = EntropyMode::kAdaptive;
  double coefficient = 0.0;
};

std::vector<EntropyVariant> entropy_variants(const ExperimentConfig& config);

struct EntropyAblationRun {
  std::uint64_t seed = 0;
  /// One training history per variant, same order as entropy_variants().
  std::vector<std::vector<EpisodeRow>> histories;
};

std::vector<EntropyAblationRun> entropy_ablation(const ExperimentConfig& config);

// Command entry points. Exit codes: 0 success, 2 config error, 3 runtime
// abort. Diagnostics go to stderr.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

int cmd_train(const ExperimentConfig& config);
int cmd_eval(const ExperimentConfig& config,
             const std::filesystem::path& checkpoint);
int cmd_ablate(const ExperimentConfig& config, const std::string& mode);

}  // namespace ippo
