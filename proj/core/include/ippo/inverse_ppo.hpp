#pragma once

#include <span>
#include <vector>

#include "ippo/autodiff.hpp"
#include "ippo/networks.hpp"
#include "ippo/optimizer.hpp"
#include "ippo/random.hpp"
#include "ippo/rollout.hpp"
#include "ippo/trainer_config.hpp"

namespace ippo {

// --- Advantage estimation ---------------------------------------------------

/// G_t = r_t + gamma * G_{t+1} over one episode, zero past the last step.
std::vector<double> returns_to_go(std::span<const double> rewards,
                                  double gamma);

/// A_t = G_t - V(s_t).
std::vector<double> inferring_advantage(std::span<const double> returns,
                                        std::span<const double> values);

/// Generalised advantage estimate over one terminated episode.
std::vector<double> gae_advantage(std::span<const double> rewards,
                                  std::span<const double> values, double gamma,
                                  double lambda);

// --- Scalar objective terms -------------------------------------------------

inline constexpr double kMinRatio = 1e-8;
inline constexpr double kMaxRatio = 1e8;

/// exp(logp_new - logp_old) * state_ratio, clamped to [1e-8, 1e8].
double importance_ratio(double log_prob_new, double log_prob_old,
                        double state_ratio = 1.0);

/// Categorical entropy -sum p ln p.
double categorical_entropy(std::span<const double> probs);

struct EntropyTerm {
  double value = 0.0;        // L_ent
  double coefficient = 0.0;  // weight it enters the objective with
  double scale = 0.0;        // success statistic (1 in fixed mode)
};

/// Entropy bonus scaled by the batch success statistic.
EntropyTerm adaptive_entropy(std::span<const ActionDistribution> dists,
                             int successes, int episode_count,
                             const TrainerConfig& config,
                             std::size_t transition_count = 0);

/// Mean over samples of min(r * A, clip(r, 1 - eps, 1 + eps) * A).
double clipped_surrogate(std::span<const double> ratios,
                         std::span<const double> advantages, double epsilon);

/// Mean squared error.
double value_loss(std::span<const double> values,
                  std::span<const double> targets);

/// L_clip - w1 * L_vf + w2 * L_ent.
double total_objective(double clip, double value, double entropy, double w1,
                       double w2);

// --- Differentiable objective ----------------------------------------------

struct Minibatch {
  ad::Tensor states;  // [n, 256]; unused when fine-tuning the encoder
  ad::Tensor depth;   // [n, 1, H, W]; fine-tuning only
  ad::Tensor goal;    // [n, 2]; fine-tuning only
  std::vector<int> actions;
  std::vector<double> log_prob_old;
  std::vector<double> advantages;
  std::vector<double> value_targets;
  std::vector<double> state_ratios;

  std::size_t size() const { return actions.size(); }
};

Minibatch make_minibatch(const RolloutBuffer& buffer,
                         std::span<const std::size_t> indices,
                         const TrainerConfig& config);

struct ObjectiveTerms {
  ad::Tensor clip;
  ad::Tensor value;
  ad::Tensor entropy;  // scaled L_ent
  ad::Tensor objective;  // L_inverse, to be maximised
  ad::Tensor ratios;
};

/// Builds the clipped, value and entropy terms on the autodiff graph.
/// `entropy_scale` and `entropy_coeff` come from adaptive_entropy().
ObjectiveTerms inverse_objective(const NetworkParameters& params,
                                 const Minibatch& batch,
                                 const TrainerConfig& config,
                                 double entropy_scale, double entropy_coeff);

struct LossReport {
  double clip = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double objective = 0.0;
  double entropy_coeff = 0.0;
  double success_ratio = 0.0;  // M_s / episodes
  double grad_norm = 0.0;
};

/// Parameters trained by the RL update for this config.
std::vector<ad::Tensor> trainable_parameters(const NetworkParameters& params,
                                             const TrainerConfig& config);

/// K epochs of shuffled minibatch ascent on L_inverse. Returns one report per
/// epoch (minibatch means). Throws NumericalError on a non-finite loss.
std::vector<LossReport> update(const RolloutBuffer& buffer,
                               NetworkParameters& params, Adam& optimizer,
                               const TrainerConfig& config, Rng& rng);

}  // namespace ippo
