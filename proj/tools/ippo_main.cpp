// ippo: train, evaluate and ablate waypoint-avoidance policies.

#include <CLI11.hpp>

#include <charconv>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ippo/errors.hpp"
#include "ippo/experiment.hpp"

namespace {

struct Options {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string out = "out";
  int episodes = 3000;
  std::size_t batch = 2048;
  std::size_t minibatch = 256;
  std::optional<double> lr;
  std::optional<int> epochs;
  std::string entropy_mode = "adaptive";
  std::optional<double> entropy_coeff;
  std::string reward_weights;
  std::string track_mode = "literal";
  unsigned workers = 1;
  int max_steps = 60;
  double waypoint_distance = 150.0;
  int pretrain_steps = 60;
  int checkpoint_every = 500;
  bool finetune_encoder = false;
  std::string advantage = "returns";
  // eval
  std::string checkpoint;
  int eval_episodes = 100;
  std::string policy = "greedy";
  // ablate
  std::string mode;
  std::vector<std::uint64_t> seeds;
  std::vector<double> fixed_coeffs = {0.01, 0.001};
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--scenario", o.scenario, "Scenario file")->required();
  cmd->add_option("--seed", o.seed, "Experiment seed");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--episodes", o.episodes, "Training episodes")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--batch", o.batch, "Transitions per update batch")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--minibatch", o.minibatch, "Minibatch size")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--lr", o.lr, "Adam learning rate")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--epochs", o.epochs, "Passes over each batch")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--entropy-mode", o.entropy_mode, "Entropy bonus scheme")
      ->check(CLI::IsMember({"adaptive", "fixed"}));
  cmd->add_option("--entropy-coeff", o.entropy_coeff,
                  "w2 (adaptive) or the fixed coefficient (fixed)");
  cmd->add_option("--reward-weights", o.reward_weights,
                  "C1,C2,C3,C4 reward term weights");
  cmd->add_option("--track-mode", o.track_mode, "Track term definition")
      ->check(CLI::IsMember({"literal", "heading"}));
  cmd->add_option("--workers", o.workers, "Parallel rollout workers")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-steps", o.max_steps, "Decision steps per episode")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--waypoint-distance", o.waypoint_distance,
                  "Waypoint distance lambda in meters")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--pretrain-steps", o.pretrain_steps,
                  "Autoencoder pretraining steps")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--checkpoint-every", o.checkpoint_every,
                  "Episodes between checkpoints (0: final only)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_flag("--finetune-encoder", o.finetune_encoder,
                "Train the encoder jointly with the policy");
  cmd->add_option("--advantage", o.advantage, "Advantage estimator")
      ->check(CLI::IsMember({"returns", "gae"}));
  cmd->add_option("--eval-episodes", o.eval_episodes, "Evaluation episodes")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--policy", o.policy, "Evaluation action selection")
      ->check(CLI::IsMember({"greedy", "sample", "uniform"}));
}

ippo::RewardWeights parse_weights(const std::string& text) {
  std::vector<double> w;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    double v = 0.0;
    const char* first = text.data() + start;
    const char* last = text.data() + comma;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
      throw ippo::ValidationError("--reward-weights: bad number in '" + text + "'");
    }
    w.push_back(v);
    start = comma + 1;
  }
  if (w.size() != 4) {
    throw ippo::ValidationError("--reward-weights needs exactly 4 values");
  }
  return {w[0], w[1], w[2], w[3]};
}

ippo::ExperimentConfig build_config(const Options& o) {
  ippo::ExperimentConfig c;
  c.scenario_path = o.scenario;
  c.scenario = ippo::load_scenario_file(o.scenario);
  c.seed = o.seed;
  c.out_dir = o.out;
  c.workers = o.workers;
  c.checkpoint_every = o.checkpoint_every;
  c.eval_episodes = o.eval_episodes;
  c.pretrain.steps = o.pretrain_steps;

  c.trainer.seed = o.seed;
  c.trainer.max_episodes = o.episodes;
  c.trainer.batch_size = o.batch;
  c.trainer.minibatch_size = o.minibatch;
  if (o.lr) c.trainer.learning_rate = *o.lr;
  if (o.epochs) c.trainer.epochs = *o.epochs;
  c.trainer.max_steps_per_episode = o.max_steps;
  c.trainer.finetune_encoder = o.finetune_encoder;
  c.trainer.advantage_mode = o.advantage == "gae"
                                 ? ippo::AdvantageMode::kGae
                                 : ippo::AdvantageMode::kReturnsMinusValue;
  if (o.entropy_mode == "fixed") {
    c.trainer.entropy_mode = ippo::EntropyMode::kFixed;
    if (o.entropy_coeff) c.trainer.fixed_entropy_coeff = *o.entropy_coeff;
  } else if (o.entropy_coeff) {
    c.trainer.entropy_coeff = *o.entropy_coeff;
  }

  c.env.waypoint_distance = o.waypoint_distance;
  c.env.track_mode = o.track_mode == "heading" ? ippo::TrackMode::kHeading
                                               : ippo::TrackMode::kLiteral;
  if (!o.reward_weights.empty()) c.env.weights = parse_weights(o.reward_weights);

  static const std::map<std::string, ippo::ActionSelection> policies = {
      {"greedy", ippo::ActionSelection::kGreedy},
      {"sample", ippo::ActionSelection::kSample},
      {"uniform", ippo::ActionSelection::kUniform}};
  c.eval_selection = policies.at(o.policy);
  c.ablation_seeds = o.seeds;
  c.ablation_fixed_coeffs = o.fixed_coeffs;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inverse-PPO waypoint obstacle avoidance for fixed-wing UAVs"};
  app.require_subcommand(1);
  Options o;

  auto* train = app.add_subcommand("train", "Pretrain the encoder and train");
  add_common(train, o);

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  add_common(eval, o);
  eval->add_option("--checkpoint", o.checkpoint, "Checkpoint file")->required();

  auto* ablate = app.add_subcommand("ablate", "Run a reward or entropy ablation");
  add_common(ablate, o);
  ablate->add_option("mode", o.mode, "reward or entropy")
      ->required()
      ->check(CLI::IsMember({"reward", "entropy"}));
  ablate->add_option("--seeds", o.seeds, "Seeds for paired runs");
  ablate->add_option("--fixed-coeffs", o.fixed_coeffs,
                     "Fixed entropy coefficients to compare");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return ippo::kExitConfig;
  }

  ippo::ExperimentConfig config;
  try {
    config = build_config(o);
  } catch (const ippo::Error& e) {
    std::cerr << "config: " << e.what() << '\n';
    return ippo::kExitConfig;
  }

  if (*train) return ippo::cmd_train(config);
  if (*eval) return ippo::cmd_eval(config, o.checkpoint);
  return ippo::cmd_ablate(config, o.mode);
}
