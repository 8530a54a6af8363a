#include "ippo/rollout.hpp"

#include <cmath>
#include <numeric>
#include <thread>

#include "ippo/inverse_ppo.hpp"

namespace ippo {

int sample_action(const ActionDistribution& dist, double u) {
  double cumulative = 0.0;
  for (std::size_t a = 0; a + 1 < kActionCount; ++a) {
    cumulative += dist.probs[a];
    if (u < cumulative) return static_cast<int>(a);
  }
  return static_cast<int>(kActionCount - 1);
}

EpisodeResult collect_episode(Environment& env, const NetworkParameters& params,
                              Rng& rng, const RolloutOptions& options) {
  env.reset();
  EpisodeResult result;
  if (options.record_trajectory) {
    const auto& s = env.uav();
    result.trajectory.push_back({0, 0, s.position.x, s.position.y, s.yaw, -1, {}});
  }

  double heading_total = 0.0;
  while (!env.done()) {
    const DepthMap depth = env.observe_depth();
    const TargetFeatures goal = env.observe_target();
    StateVector state = build_state(depth, params, goal);
    const ActionDistribution dist = policy_forward(params, state.values);

    int action = 0;
    switch (options.selection) {
      case ActionSelection::kSample:
        action = sample_action(dist, rng.uniform());
        break;
      case ActionSelection::kGreedy:
        action = static_cast<int>(dist.argmax());
        break;
      case ActionSelection::kUniform:
        action = static_cast<int>(rng.below(kActionCount));
        break;
    }

    Transition t;
    t.value_old = value_forward(params, state.values);
    t.state = std::move(state.values);
    t.action = action;
    t.log_prob_old = dist.log_probs[static_cast<std::size_t>(action)];
    if (options.keep_depth) t.depth = depth.normalized();
    t.target = goal;

    const StepOutcome out = env.step(action);
    t.reward = out.reward;
    t.done = out.done;
    t.heading_change = std::abs(wrap_angle(out.after.yaw - out.before.yaw));
    heading_total += t.heading_change;
    result.total_reward += out.reward.total;
    if (out.done) result.success = out.events.reached_target;

    if (options.record_trajectory) {
      const int step = env.decision_steps();
      int k = 0;
      for (const auto& sub : out.events.sub_path) {
        result.trajectory.push_back({step, ++k, sub.position.x, sub.position.y,
                                     sub.yaw, action, out.reward});
      }
      if (out.events.sub_path.empty()) {
        const auto& s = out.after;
        result.trajectory.push_back(
            {step, 0, s.position.x, s.position.y, s.yaw, action, out.reward});
      }
    }
    result.transitions.push_back(std::move(t));
  }

  for (auto& t : result.transitions) t.success_episode = result.success;
  result.smoothness =
      heading_total / static_cast<double>(result.transitions.size());
  return result;
}

void compute_targets(RolloutBuffer& buffer, const TrainerConfig& config) {
  const std::size_t n = buffer.transitions.size();
  buffer.returns.assign(n, 0.0);
  buffer.advantages.assign(n, 0.0);
  for (const auto& ep : buffer.episodes) {
    std::vector<double> rewards(ep.length);
    std::vector<double> values(ep.length);
    for (std::size_t i = 0; i < ep.length; ++i) {
      rewards[i] = buffer.transitions[ep.first + i].reward.total;
      values[i] = buffer.transitions[ep.first + i].value_old;
    }
    const auto g = returns_to_go(rewards, config.gamma);
    const auto a = config.advantage_mode == AdvantageMode::kGae
                       ? gae_advantage(rewards, values, config.gamma,
                                       config.gae_lambda)
                       : inferring_advantage(g, values);
    std::copy(g.begin(), g.end(), buffer.returns.begin() + static_cast<std::ptrdiff_t>(ep.first));
    std::copy(a.begin(), a.end(), buffer.advantages.begin() + static_cast<std::ptrdiff_t>(ep.first));
  }
  if (config.normalize_advantages) normalize_advantages(buffer);
}

void normalize_advantages(RolloutBuffer& buffer) {
  auto& adv = buffer.advantages;
  if (adv.empty()) return;
  const double n = static_cast<double>(adv.size());
  const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / n;
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  const double std = std::sqrt(var / n);
  if (std < 1e-8) return;
  for (double& a : adv) a = (a - mean) / std;
}

RolloutBuffer collect_batch(const EnvFactory& make_env,
                            const NetworkParameters& params,
                            const BatchOptions& options,
                            const TrainerConfig& config) {
  RolloutBuffer buffer;
  const unsigned workers = std::max(1u, options.workers);
  std::uint64_t next_episode = options.first_episode;

  auto run_one = [&](std::uint64_t index, Environment& env) {
    Rng rng(Rng::derive(options.seed, index));
    return collect_episode(env, params, rng, options.rollout);
  };

  std::vector<Environment> envs;
  envs.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) envs.push_back(make_env());

  auto satisfied = [&] {
    return buffer.transitions.size() >= std::max<std::size_t>(1, options.batch_size) ||
           (options.max_episodes > 0 &&
            buffer.episodes.size() >= options.max_episodes);
  };

  while (!satisfied()) {
    std::size_t round = workers;
    if (options.max_episodes > 0) {
      round = std::min<std::size_t>(round,
                                    options.max_episodes - buffer.episodes.size());
    }
    std::vector<EpisodeResult> results(round);
    if (round == 1) {
      results[0] = run_one(next_episode, envs[0]);
    } else {
      std::vector<std::thread> threads;
      for (std::size_t w = 0; w < round; ++w) {
        threads.emplace_back([&, w] { results[w] = run_one(next_episode + w, envs[w]); });
      }
      for (auto& t : threads) t.join();
    }
    // Merge in episode-index order; episodes past the threshold are dropped
    // so the batch is independent of the worker count.
    for (auto& r : results) {
      if (satisfied()) break;
      EpisodeSummary summary;
      summary.first = buffer.transitions.size();
      summary.length = r.transitions.size();
      summary.success = r.success;
      summary.total_reward = r.total_reward;
      summary.smoothness = r.smoothness;
      buffer.successes += r.success ? 1 : 0;
      buffer.episodes.push_back(summary);
      for (auto& t : r.transitions) buffer.transitions.push_back(std::move(t));
      ++next_episode;
    }
  }
  compute_targets(buffer, config);
  return buffer;
}

}  // namespace ippo
