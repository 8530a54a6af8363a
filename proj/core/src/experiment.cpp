#include "ippo/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <iostream>

#include "ippo/autoencoder.hpp"
#include "ippo/checkpoint.hpp"
#include "ippo/errors.hpp"
#include "ippo/report.hpp"

namespace ippo {

namespace {

// Substream tags under the experiment seed.
constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kRolloutStream = 1;
constexpr std::uint64_t kUpdateStream = 2;
constexpr std::uint64_t kPretrainStream = 3;
constexpr std::uint64_t kEvalStream = 4;

std::vector<std::uint64_t> seeds_of(const ExperimentConfig& config) {
  if (config.ablation_seeds.empty()) return {config.seed};
  return config.ablation_seeds;
}

}  // namespace

Environment make_environment(const ExperimentConfig& config) {
  ScenarioSpec scenario = config.scenario;
  if (config.trainer.max_steps_per_episode > 0) {
    scenario.max_steps = config.trainer.max_steps_per_episode;
  }
  return Environment(std::move(scenario), config.env);
}

NetworkParameters pretrained_parameters(const ExperimentConfig& config) {
  NetworkConfig net;
  net.depth_height = static_cast<std::size_t>(config.env.sensor.height);
  net.depth_width = static_cast<std::size_t>(config.env.sensor.width);
  NetworkParameters params =
      init_parameters(net, Rng::derive(config.seed, kInitStream));

  const PretrainConfig& pre = config.pretrain;
  if (pre.maps <= 0 || pre.steps <= 0) return params;
  if (pre.batch <= 0) throw ValidationError("pretrain batch must be >= 1");

  Rng rng(Rng::derive(config.seed, kPretrainStream));
  Environment env = make_environment(config);
  std::vector<DepthMap> maps;
  maps.reserve(static_cast<std::size_t>(pre.maps));
  while (maps.size() < static_cast<std::size_t>(pre.maps)) {
    env.reset();
    while (!env.done() && maps.size() < static_cast<std::size_t>(pre.maps)) {
      maps.push_back(env.observe_depth());
      env.step(static_cast<int>(rng.below(kActionCount)));
    }
  }

  Adam optimizer(autoencoder_parameters(params), {pre.learning_rate});
  std::vector<DepthMap> batch;
  for (int s = 0; s < pre.steps; ++s) {
    batch.clear();
    for (int b = 0; b < pre.batch; ++b) {
      batch.push_back(maps[rng.below(maps.size())]);
    }
    autoencoder_train_step(params, optimizer, batch);
  }
  standardize_latent(params, maps);
  return params;
}

TrainResult train(const ExperimentConfig& config,
                  const std::optional<NetworkParameters>& initial,
                  const TrainHooks& hooks) {
  const TrainerConfig& tc = config.trainer;
  if (tc.max_episodes < 1) throw ValidationError("max episodes must be >= 1");
  if (tc.batch_size < 1) throw ValidationError("batch size must be >= 1");

  TrainResult result;
  result.params = initial ? initial->clone() : pretrained_parameters(config);
  Adam optimizer(trainable_parameters(result.params, tc),
                 {tc.learning_rate, 0.9, 0.999, 1e-8});
  Rng update_rng(Rng::derive(config.seed, kUpdateStream));
  const EnvFactory factory = [&config] { return make_environment(config); };

  int episodes = 0;
  while (episodes < tc.max_episodes) {
    BatchOptions batch;
    batch.batch_size = tc.batch_size;
    batch.max_episodes = static_cast<std::size_t>(tc.max_episodes - episodes);
    batch.first_episode = static_cast<std::uint64_t>(episodes);
    batch.seed = Rng::derive(config.seed, kRolloutStream);
    batch.workers = config.workers;
    batch.rollout.selection = ActionSelection::kSample;
    batch.rollout.keep_depth = tc.finetune_encoder;
    const RolloutBuffer buffer =
        collect_batch(factory, result.params, batch, tc);

    LossReport last;
    try {
      const auto reports =
          update(buffer, result.params, optimizer, tc, update_rng);
      last = reports.back();
    } catch (const NumericalError& e) {
      result.abort_reason = e.what();
    }

    for (const auto& ep : buffer.episodes) {
      EpisodeRow row;
      row.episode = episodes++;
      row.steps = static_cast<int>(ep.length);
      row.ret = ep.total_reward;
      row.success = ep.success;
      row.smoothness = ep.smoothness;
      row.loss = last;
      result.rows.push_back(row);
    }
    if (result.abort_reason) break;
    if (hooks.on_update) hooks.on_update(episodes, result.params);
  }
  return result;
}

EvalResult evaluate(const NetworkParameters& params,
                    const ExperimentConfig& config, bool record_trajectories) {
  if (config.eval_episodes < 1) throw ValidationError("eval episodes must be >= 1");
  Environment env = make_environment(config);
  RolloutOptions opts;
  opts.selection = config.eval_selection;
  opts.record_trajectory = record_trajectories;
  const std::uint64_t stream = Rng::derive(config.seed, kEvalStream);

  EvalResult result;
  int successes = 0;
  for (int i = 0; i < config.eval_episodes; ++i) {
    Rng rng(Rng::derive(stream, static_cast<std::uint64_t>(i)));
    EpisodeResult ep = collect_episode(env, params, rng, opts);
    EvalEpisode e;
    e.episode = i;
    e.steps = static_cast<int>(ep.transitions.size());
    e.ret = ep.total_reward;
    e.success = ep.success;
    e.smoothness = ep.smoothness;
    e.trajectory = std::move(ep.trajectory);
    successes += e.success ? 1 : 0;
    result.mean_smoothness += e.smoothness;
    result.mean_return += e.ret;
    result.episodes.push_back(std::move(e));
  }
  const double n = static_cast<double>(config.eval_episodes);
  result.success_rate = successes / n;
  result.mean_smoothness /= n;
  result.mean_return /= n;
  return result;
}

double tail_mean_return(const std::vector<EpisodeRow>& rows,
                        std::size_t window) {
  const std::size_t n = std::min(window, rows.size());
  if (n == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = rows.size() - n; i < rows.size(); ++i) total += rows[i].ret;
  return total / static_cast<double>(n);
}

double tail_success_rate(const std::vector<EpisodeRow>& rows,
                         std::size_t window) {
  const std::size_t n = std::min(window, rows.size());
  if (n == 0) return 0.0;
  int s = 0;
  for (std::size_t i = rows.size() - n; i < rows.size(); ++i) {
    s += rows[i].success ? 1 : 0;
  }
  return static_cast<double>(s) / static_cast<double>(n);
}

std::vector<RewardAblationRow> reward_ablation(const ExperimentConfig& config) {
  std::vector<RewardAblationRow> out;
  for (std::uint64_t seed : seeds_of(config)) {
    ExperimentConfig full = config;
    full.seed = seed;
    ExperimentConfig distance = full;
    distance.env.weights = RewardWeights::distance_only();

    const NetworkParameters initial = pretrained_parameters(full);
    RewardAblationRow row;
    row.seed = seed;
    row.distance_only =
        evaluate(train(distance, initial).params, distance);
    row.full = evaluate(train(full, initial).params, full);
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<EntropyVariant> entropy_variants(const ExperimentConfig& config) {
  std::vector<EntropyVariant> out;
  for (double c : config.ablation_fixed_coeffs) {
    out.push_back({"fixed_" + format_number(c), EntropyMode::kFixed, c});
  }
  out.push_back({"adaptive", EntropyMode::kAdaptive, config.trainer.entropy_coeff});
  return out;
}

std::vector<EntropyAblationRun> entropy_ablation(const ExperimentConfig& config) {
  const auto variants = entropy_variants(config);
  std::vector<EntropyAblationRun> out;
  for (std::uint64_t seed : seeds_of(config)) {
    ExperimentConfig base = config;
    base.seed = seed;
    const NetworkParameters initial = pretrained_parameters(base);
    EntropyAblationRun run;
    run.seed = seed;
    for (const auto& v : variants) {
      ExperimentConfig c = base;
      c.trainer.entropy_mode = v.mode;
      if (v.mode == EntropyMode::kFixed) {
        c.trainer.fixed_entropy_coeff = v.coefficient;
      } else {
        c.trainer.entropy_coeff = v.coefficient;
      }
      run.histories.push_back(train(c, initial).rows);
    }
    out.push_back(std::move(run));
  }
  return out;
}

namespace {

template <typename F>
int guarded(const char* command, F&& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    std::cerr << command << ": " << e.what() << '\n';
    return kExitConfig;
  } catch (const ValidationError& e) {
    std::cerr << command << ": " << e.what() << '\n';
    return kExitConfig;
  } catch (const CheckpointError& e) {
    std::cerr << command << ": " << e.what() << '\n';
    return kExitConfig;
  } catch (const ShapeError& e) {
    std::cerr << command << ": " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << command << ": " << e.what() << '\n';
    return kExitRuntime;
  }
}

std::string checkpoint_name(int episodes) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "checkpoint_%06d.ippo", episodes);
  return buf;
}

}  // namespace

int cmd_train(const ExperimentConfig& config) {
  return guarded("train", [&] {
    const auto& out = config.out_dir;
    std::filesystem::create_directories(out);
    int saved_block = 0;
    TrainHooks hooks;
    hooks.on_update = [&](int episodes, const NetworkParameters& params) {
      if (config.checkpoint_every <= 0) return;
      const int block = episodes / config.checkpoint_every;
      if (block > saved_block && episodes < config.trainer.max_episodes) {
        saved_block = block;
        save_checkpoint(params, out / checkpoint_name(episodes));
      }
    };

    const TrainResult result = train(config, std::nullopt, hooks);
    write_text_file(out / "training.csv", training_csv(result.rows));
    if (result.abort_reason) {
      save_checkpoint(result.params, out / "aborted.ippo");
      std::cerr << "train: aborted: " << *result.abort_reason << '\n';
      return kExitRuntime;
    }
    save_checkpoint(result.params, out / "final.ippo");
    std::cout << "episodes " << result.rows.size() << ", final-100 success "
              << format_number(tail_success_rate(result.rows, 100))
              << ", final-100 return "
              << format_number(tail_mean_return(result.rows, 100)) << '\n';
    return kExitOk;
  });
}

int cmd_eval(const ExperimentConfig& config,
             const std::filesystem::path& checkpoint) {
  return guarded("eval", [&] {
    const NetworkParameters params = load_checkpoint(checkpoint);
    const NetworkConfig net = params.config();
    if (net.depth_height != static_cast<std::size_t>(config.env.sensor.height) ||
        net.depth_width != static_cast<std::size_t>(config.env.sensor.width)) {
      throw ShapeError("checkpoint depth size does not match the sensor");
    }
    const EvalResult result = evaluate(params, config, true);

    const auto& out = config.out_dir;
    write_text_file(out / "eval.csv", eval_csv(result.episodes));
    std::vector<std::vector<TrajectoryRow>> paths;
    for (const auto& e : result.episodes) {
      char name[48];
      std::snprintf(name, sizeof name, "trajectory_%04d.csv", e.episode);
      write_text_file(out / "trajectories" / name, trajectory_csv(e.trajectory));
      paths.push_back(e.trajectory);
    }
    write_text_file(out / "trajectories.svg",
                    trajectory_svg(config.scenario, paths));
    std::cout << "success_rate " << format_number(result.success_rate)
              << "\nmean_smoothness " << format_number(result.mean_smoothness)
              << "\nmean_return " << format_number(result.mean_return) << '\n';
    return kExitOk;
  });
}

int cmd_ablate(const ExperimentConfig& config, const std::string& mode) {
  return guarded("ablate", [&] {
    const auto& out = config.out_dir;
    if (mode == "reward") {
      const auto rows = reward_ablation(config);
      std::string csv = "seed,metric,distance,full\n";
      auto line = [&](std::uint64_t seed, const char* metric, double a,
                      double b) {
        csv += std::to_string(seed) + ',' + metric + ',' + format_number(a) +
               ',' + format_number(b) + '\n';
      };
      for (const auto& r : rows) {
        line(r.seed, "success_rate", r.distance_only.success_rate,
             r.full.success_rate);
        line(r.seed, "smoothness", r.distance_only.mean_smoothness,
             r.full.mean_smoothness);
        line(r.seed, "mean_return", r.distance_only.mean_return,
             r.full.mean_return);
      }
      write_text_file(out / "reward_ablation.csv", csv);
      std::cout << csv;
      return kExitOk;
    }
    if (mode == "entropy") {
      const auto variants = entropy_variants(config);
      const auto runs = entropy_ablation(config);
      std::string csv = "seed,episode";
      for (const auto& v : variants) csv += ',' + v.label;
      csv += '\n';
      for (const auto& run : runs) {
        const std::size_t n = run.histories.front().size();
        for (std::size_t i = 0; i < n; ++i) {
          csv += std::to_string(run.seed) + ',' + std::to_string(i);
          for (const auto& h : run.histories) {
            csv += ',' + (i < h.size() ? format_number(h[i].ret) : "");
          }
          csv += '\n';
        }
        std::cout << "seed " << run.seed;
        for (std::size_t v = 0; v < variants.size(); ++v) {
          std::cout << "  " << variants[v].label << " final-100 return "
                    << format_number(tail_mean_return(run.histories[v], 100));
        }
        std::cout << '\n';
      }
      write_text_file(out / "entropy_ablation.csv", csv);
      return kExitOk;
    }
    throw ValidationError("unknown ablation mode '" + mode +
                          "' (expected reward or entropy)");
  });
}

}  // namespace ippo
