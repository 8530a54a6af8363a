#pragma once

#include <cstdint>
#include <functional>

namespace ippo {

struct Transition;

enum class AdvantageMode {
  kReturnsMinusValue,  // discounted return-to-go minus critic value
  kGae,
};

enum class EntropyMode {
  kAdaptive,  // w2 scaled by the batch success statistic
  kFixed,     // constant coefficient, no success scaling
};

enum class EntropyScale {
  kSuccessFraction,  // M_s / episodes in batch
  kPerTransition,    // M_s / transitions in batch
};

/// Multiplies the action-probability ratio; return 1 for plain PPO.
using StateRatioFn = std::function<double(const Transition&)>;

struct TrainerConfig {
  double gamma = 0.95;
  double clip_epsilon = 0.3;
  int epochs = 2;
  std::size_t batch_size = 2048;
  std::size_t minibatch_size = 256;
  double value_coeff = 0.5;    // w1
  double entropy_coeff = 0.1;  // w2
  double learning_rate = 3e-4;
  int max_episodes = 3000;
  /// Overrides the scenario's decision-step cap when > 0.
  int max_steps_per_episode = 60;

  AdvantageMode advantage_mode = AdvantageMode::kReturnsMinusValue;
  double gae_lambda = 0.95;
  bool normalize_advantages = true;

  EntropyMode entropy_mode = EntropyMode::kAdaptive;
  EntropyScale entropy_scale = EntropyScale::kSuccessFraction;
  double fixed_entropy_coeff = 0.01;

  /// Empty means unity state-marginal ratio.
  StateRatioFn state_ratio;

  bool finetune_encoder = false;
  std::uint64_t seed = 0;
};

}  // namespace ippo
