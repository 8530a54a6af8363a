#include "ippo/inverse_ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ippo/errors.hpp"

namespace ippo {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    std::ostringstream os;
    os << what << ": length mismatch (" << a << " vs " << b << ")";
    throw ShapeError(os.str());
  }
}

}  // namespace

std::vector<double> returns_to_go(std::span<const double> rewards,
                                  double gamma) {
  std::vector<double> out(rewards.size());
  double g = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    g = rewards[i] + gamma * g;
    out[i] = g;
  }
  return out;
}

std::vector<double> inferring_advantage(std::span<const double> returns,
                                        std::span<const double> values) {
  require_same_length(returns.size(), values.size(), "inferring_advantage");
  std::vector<double> out(returns.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = returns[i] - values[i];
  return out;
}

std::vector<double> gae_advantage(std::span<const double> rewards,
                                  std::span<const double> values, double gamma,
                                  double lambda) {
  require_same_length(rewards.size(), values.size(), "gae_advantage");
  std::vector<double> out(rewards.size());
  double acc = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    const double next_value = i + 1 < values.size() ? values[i + 1] : 0.0;
    const double delta = rewards[i] + gamma * next_value - values[i];
    acc = delta + gamma * lambda * acc;
    out[i] = acc;
  }
  return out;
}

double importance_ratio(double log_prob_new, double log_prob_old,
                        double state_ratio) {
  const double r = std::exp(log_prob_new - log_prob_old) * state_ratio;
  return std::clamp(r, kMinRatio, kMaxRatio);
}

double categorical_entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

namespace {

double entropy_scale(int successes, int episode_count,
                     std::size_t transition_count,
                     const TrainerConfig& config) {
  if (config.entropy_mode == EntropyMode::kFixed) return 1.0;
  if (config.entropy_scale == EntropyScale::kPerTransition) {
    if (transition_count == 0) throw ValidationError("no transitions in batch");
    return static_cast<double>(successes) /
           static_cast<double>(transition_count);
  }
  if (episode_count < 1) throw ValidationError("episode_count must be >= 1");
  return static_cast<double>(successes) / static_cast<double>(episode_count);
}

double entropy_coefficient(const TrainerConfig& config) {
  return config.entropy_mode == EntropyMode::kFixed ? config.fixed_entropy_coeff
                                                    : config.entropy_coeff;
}

}  // namespace

EntropyTerm adaptive_entropy(std::span<const ActionDistribution> dists,
                             int successes, int episode_count,
                             const TrainerConfig& config,
                             std::size_t transition_count) {
  EntropyTerm term;
  term.scale = entropy_scale(successes, episode_count, transition_count, config);
  term.coefficient = entropy_coefficient(config);
  if (dists.empty()) return term;
  double total = 0.0;
  for (const auto& d : dists) total += categorical_entropy(d.probs);
  term.value = term.scale * total / static_cast<double>(dists.size());
  return term;
}

double clipped_surrogate(std::span<const double> ratios,
                         std::span<const double> advantages, double epsilon) {
  require_same_length(ratios.size(), advantages.size(), "clipped_surrogate");
  if (ratios.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    const double a = advantages[i];
    const double clipped = std::clamp(ratios[i], 1.0 - epsilon, 1.0 + epsilon);
    total += std::min(ratios[i] * a, clipped * a);
  }
  return total / static_cast<double>(ratios.size());
}

double value_loss(std::span<const double> values,
                  std::span<const double> targets) {
  require_same_length(values.size(), targets.size(), "value_loss");
  if (values.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double e = values[i] - targets[i];
    total += e * e;
  }
  return total / static_cast<double>(values.size());
}

double total_objective(double clip, double value, double entropy, double w1,
                       double w2) {
  return clip - w1 * value + w2 * entropy;
}

Minibatch make_minibatch(const RolloutBuffer& buffer,
                         std::span<const std::size_t> indices,
                         const TrainerConfig& config) {
  const std::size_t n = indices.size();
  if (n == 0) throw ValidationError("empty minibatch");
  if (buffer.advantages.size() != buffer.transitions.size() ||
      buffer.returns.size() != buffer.transitions.size()) {
    throw ValidationError("rollout buffer has no advantages or returns");
  }

  Minibatch mb;
  mb.actions.reserve(n);
  mb.log_prob_old.reserve(n);
  mb.advantages.reserve(n);
  mb.value_targets.reserve(n);
  mb.state_ratios.reserve(n);

  std::vector<double> states;
  std::vector<double> depth;
  std::vector<double> goal;
  std::size_t depth_size = 0;
  for (std::size_t idx : indices) {
    const Transition& t = buffer.transitions.at(idx);
    mb.actions.push_back(t.action);
    mb.log_prob_old.push_back(t.log_prob_old);
    mb.advantages.push_back(buffer.advantages[idx]);
    mb.value_targets.push_back(buffer.returns[idx]);
    const double ratio = config.state_ratio ? config.state_ratio(t) : 1.0;
    if (!(ratio > 0.0) || !std::isfinite(ratio)) {
      throw ValidationError("state ratio must be finite and > 0");
    }
    mb.state_ratios.push_back(ratio);

    if (config.finetune_encoder) {
      if (t.depth.empty()) {
        throw ValidationError("encoder fine-tuning needs stored depth maps");
      }
      if (depth_size == 0) depth_size = t.depth.size();
      require_same_length(t.depth.size(), depth_size, "make_minibatch depth");
      depth.insert(depth.end(), t.depth.begin(), t.depth.end());
      goal.push_back(t.target.distance);
      goal.push_back(t.target.bearing);
    } else {
      require_same_length(t.state.size(), kStateDim, "make_minibatch state");
      states.insert(states.end(), t.state.begin(), t.state.end());
    }
  }
  if (config.finetune_encoder) {
    mb.goal = ad::Tensor::from({n, 2}, std::move(goal));
    mb.depth = ad::Tensor::from({n, 1, 1, depth_size}, std::move(depth));
  } else {
    mb.states = ad::Tensor::from({n, kStateDim}, std::move(states));
  }
  return mb;
}

ObjectiveTerms inverse_objective(const NetworkParameters& params,
                                 const Minibatch& batch,
                                 const TrainerConfig& config,
                                 double entropy_scale, double entropy_coeff) {
  const std::size_t n = batch.size();
  ad::Tensor states = batch.states;
  if (config.finetune_encoder) {
    const NetworkConfig cfg = params.config();
    const ad::Tensor depth = ad::reshape(
        batch.depth, {n, 1, cfg.depth_height, cfg.depth_width});
    states = ad::concat_cols(encoder_forward(params, depth), batch.goal);
  }

  const ad::Tensor log_probs = ad::log_softmax(policy_logits(params, states));
  const ad::Tensor taken = ad::gather_cols(log_probs, batch.actions);

  std::vector<double> old_minus_ratio(n);
  for (std::size_t i = 0; i < n; ++i) {
    old_minus_ratio[i] = -batch.log_prob_old[i] + std::log(batch.state_ratios[i]);
  }
  const ad::Tensor log_ratio =
      ad::add(taken, ad::Tensor::from({n}, std::move(old_minus_ratio)));
  const ad::Tensor ratios =
      ad::clamp(ad::exp(log_ratio), kMinRatio, kMaxRatio);

  const ad::Tensor adv = ad::Tensor::from({n}, batch.advantages);
  const ad::Tensor unclipped = ad::mul(ratios, adv);
  const ad::Tensor clipped = ad::mul(
      ad::clamp(ratios, 1.0 - config.clip_epsilon, 1.0 + config.clip_epsilon),
      adv);

  ObjectiveTerms terms;
  terms.ratios = ratios;
  terms.clip = ad::mean(ad::minimum(unclipped, clipped));

  const ad::Tensor values = value_batch(params, states);
  const ad::Tensor targets = ad::Tensor::from({n}, batch.value_targets);
  terms.value = ad::mean(ad::square(ad::sub(values, targets)));

  const ad::Tensor per_state =
      ad::row_sum(ad::mul(ad::exp(log_probs), log_probs));
  terms.entropy = ad::scale(ad::mean(per_state), -entropy_scale);

  terms.objective = ad::add(
      ad::sub(terms.clip, ad::scale(terms.value, config.value_coeff)),
      ad::scale(terms.entropy, entropy_coeff));
  return terms;
}

std::vector<ad::Tensor> trainable_parameters(const NetworkParameters& params,
                                             const TrainerConfig& config) {
  std::vector<ad::Tensor> out = params.group("policy.");
  for (auto& t : params.group("value.")) out.push_back(t);
  if (config.finetune_encoder) {
    for (auto& t : params.group("encoder.")) out.push_back(t);
  }
  return out;
}

std::vector<LossReport> update(const RolloutBuffer& buffer,
                               NetworkParameters& params, Adam& optimizer,
                               const TrainerConfig& config, Rng& rng) {
  const std::size_t n = buffer.transitions.size();
  if (n == 0) throw ValidationError("update on an empty rollout buffer");
  if (config.epochs < 1) throw ValidationError("epochs must be >= 1");
  if (config.minibatch_size < 1) throw ValidationError("minibatch_size must be >= 1");

  const double scale = entropy_scale(buffer.successes, buffer.episode_count(),
                                     n, config);
  const double coeff = entropy_coefficient(config);
  const double success_ratio =
      buffer.episode_count() > 0
          ? static_cast<double>(buffer.successes) / buffer.episode_count()
          : 0.0;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<LossReport> reports;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) {
      std::swap(order[i - 1], order[rng.below(i)]);
    }

    LossReport report;
    report.entropy_coeff = coeff;
    report.success_ratio = success_ratio;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < n; begin += config.minibatch_size) {
      const std::size_t end = std::min(n, begin + config.minibatch_size);
      const std::span<const std::size_t> idx(order.data() + begin, end - begin);
      const Minibatch mb = make_minibatch(buffer, idx, config);

      params.zero_grad();
      optimizer.zero_grad();
      const ObjectiveTerms terms =
          inverse_objective(params, mb, config, scale, coeff);
      const double objective = terms.objective.item();
      if (!std::isfinite(objective)) {
        std::ostringstream os;
        os << "non-finite objective in epoch " << epoch << " (L_clip "
           << terms.clip.item() << ", L_vf " << terms.value.item()
           << ", L_ent " << terms.entropy.item() << ")";
        throw NumericalError(os.str());
      }
      ad::scale(terms.objective, -1.0).backward();
      const double norm = optimizer.grad_norm();
      optimizer.step();
      optimizer.zero_grad();

      report.clip += terms.clip.item();
      report.value += terms.value.item();
      report.entropy += terms.entropy.item();
      report.objective += objective;
      report.grad_norm += norm;
      ++batches;
    }
    const double inv = 1.0 / static_cast<double>(batches);
    report.clip *= inv;
    report.value *= inv;
    report.entropy *= inv;
    report.objective *= inv;
    report.grad_norm *= inv;
    reports.push_back(report);
  }
  params.zero_grad();
  return reports;
}

}  // namespace ippo
