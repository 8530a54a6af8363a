#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include <sys/wait.h>

#include "ippo/checkpoint.hpp"
#include "ippo/experiment.hpp"
#include "ippo/report.hpp"
#include "support.hpp"

using namespace ippo;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

ExperimentConfig tiny_config(const std::string& scenario, const fs::path& out) {
  ExperimentConfig c;
  c.scenario_path = test::scenario_path(scenario);
  c.scenario = load_scenario_file(c.scenario_path);
  c.out_dir = out;
  c.seed = 1;
  c.trainer.max_episodes = 1;
  c.trainer.batch_size = 1;
  c.trainer.minibatch_size = 1;
  c.pretrain.maps = 8;
  c.pretrain.steps = 1;
  c.pretrain.batch = 4;
  c.eval_episodes = 3;
  return c;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd =
      std::string("\"") + IPPO_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("format_number round-trips doubles") {
  Rng rng(1);
  for (int i = 0; i < 2000; ++i) {
    const double v = rng.uniform(-1e6, 1e6) * std::pow(10.0, rng.uniform(-12, 6));
    CHECK(std::stod(format_number(v)) == v);
  }
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(3.0) == "3");
  CHECK(std::stod(format_number(std::numeric_limits<double>::min())) ==
        std::numeric_limits<double>::min());
}

TEST_CASE("training CSV has a stable header and parses back") {
  std::vector<EpisodeRow> rows(3);
  for (int i = 0; i < 3; ++i) {
    rows[i].episode = i;
    rows[i].steps = 10 + i;
    rows[i].ret = -3.25 * i;
    rows[i].success = i == 1;
    rows[i].smoothness = 0.1 * i;
    rows[i].loss.objective = 1.0 / 3.0;
  }
  const auto table = parse_csv(training_csv(rows));
  REQUIRE(table.size() == 4);
  CHECK(table[0].size() == 12);
  std::string header;
  for (const auto& h : table[0]) header += (header.empty() ? "" : ",") + h;
  CHECK(header == kTrainingCsvHeader);
  for (int i = 0; i < 3; ++i) {
    REQUIRE(table[i + 1].size() == 12);
    CHECK(std::stoi(table[i + 1][0]) == i);
    CHECK(std::stod(table[i + 1][2]) == rows[i].ret);
    CHECK(table[i + 1][3] == (i == 1 ? "1" : "0"));
    CHECK(std::stod(table[i + 1][8]) == 1.0 / 3.0);
  }
}

TEST_CASE("tail statistics") {
  std::vector<EpisodeRow> rows(10);
  for (int i = 0; i < 10; ++i) {
    rows[i].ret = i;
    rows[i].success = i >= 8;
  }
  CHECK(tail_mean_return(rows, 4) == doctest::Approx(7.5));
  CHECK(tail_success_rate(rows, 4) == doctest::Approx(0.5));
  CHECK(tail_success_rate(rows, 100) == doctest::Approx(0.2));
}

TEST_CASE("SVG draws every obstacle and one polyline per path") {
  const ScenarioSpec s = load_scenario_file(test::scenario_path("canyon"));
  std::vector<std::vector<TrajectoryRow>> paths(2);
  for (auto& p : paths) {
    for (int i = 0; i < 5; ++i) p.push_back({i, 0, 100.0 * i, 5.0 * i, 0.0, 1, {}});
  }
  const std::string svg = trajectory_svg(s, paths);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(count(svg, "<polyline") == 2);
  CHECK(count(svg, "<rect") >= s.field.boxes.size());
  const ScenarioSpec c = load_scenario_file(test::scenario_path("corridor5"));
  CHECK(count(trajectory_svg(c, {}), "<circle") == c.field.circles.size() + 1);
}

TEST_CASE("train writes one row and a final checkpoint; eval leaves it intact") {
  const fs::path dir = test::scratch_dir("train_eval");
  ExperimentConfig c = tiny_config("open", dir);
  REQUIRE(cmd_train(c) == kExitOk);
  const auto table = parse_csv(slurp(dir / "training.csv"));
  CHECK(table.size() == 2);
  REQUIRE(fs::exists(dir / "final.ippo"));
  const std::string before = slurp(dir / "final.ippo");

  c.out_dir = dir / "eval";
  REQUIRE(cmd_eval(c, dir / "final.ippo") == kExitOk);
  CHECK(slurp(dir / "final.ippo") == before);
  const auto eval = parse_csv(slurp(c.out_dir / "eval.csv"));
  REQUIRE(eval.size() == 4);
  int successes = 0;
  for (std::size_t i = 1; i < eval.size(); ++i) successes += std::stoi(eval[i][3]);
  const EvalResult again = evaluate(load_checkpoint(dir / "final.ippo"), c);
  CHECK(again.success_rate == doctest::Approx(successes / 3.0));
  CHECK(fs::exists(c.out_dir / "trajectories" / "trajectory_0000.csv"));
  CHECK(count(slurp(c.out_dir / "trajectories.svg"), "<polyline") == 3);
  const auto traj = parse_csv(slurp(c.out_dir / "trajectories" / "trajectory_0000.csv"));
  CHECK(traj[0].size() == 11);
}

TEST_CASE("random-weight network does not solve corridor5") {
  ExperimentConfig c = tiny_config("corridor5", test::scratch_dir("random_eval"));
  c.eval_episodes = 100;
  for (std::uint64_t seed : {1, 2, 3}) {
    CHECK(evaluate(init_parameters(NetworkConfig{}, seed), c).success_rate <= 0.2);
  }
}

TEST_CASE("periodic checkpoints are named by episode count") {
  const fs::path dir = test::scratch_dir("ckpt_every");
  ExperimentConfig c = tiny_config("open", dir);
  c.trainer.max_episodes = 4;
  c.checkpoint_every = 2;
  REQUIRE(cmd_train(c) == kExitOk);
  CHECK(fs::exists(dir / "checkpoint_000002.ippo"));
  CHECK(fs::exists(dir / "final.ippo"));
  CHECK(parse_csv(slurp(dir / "training.csv")).size() == 5);
}

TEST_CASE("eval rejects a checkpoint with a different depth size") {
  const fs::path dir = test::scratch_dir("mismatch");
  save_checkpoint(test::small_params(1), dir / "small.ippo");
  ExperimentConfig c = tiny_config("open", dir / "out");
  CHECK(cmd_eval(c, dir / "small.ippo") == kExitConfig);
  CHECK(cmd_eval(c, dir / "missing.ippo") == kExitConfig);
}

TEST_CASE("CLI exit codes") {
  const fs::path dir = test::scratch_dir("cli");
  const std::string open = test::scenario_path("open").string();
  CHECK(run_cli("train --bogus", dir / "a.log") == 2);
  CHECK(run_cli("train --scenario \"" + (dir / "nope.scn").string() + "\"", dir / "b.log") == 2);
  CHECK(run_cli("train --scenario \"" + open + "\" --episodes 0", dir / "c.log") == 2);
  CHECK(run_cli("ablate sideways --scenario \"" + open + "\"", dir / "d.log") == 2);
  save_checkpoint(test::small_params(1), dir / "small.ippo");
  CHECK(run_cli("eval --scenario \"" + open + "\" --checkpoint \"" +
                    (dir / "small.ippo").string() + "\" --out \"" + (dir / "e").string() + "\"",
                dir / "e.log") == 2);
  CHECK(slurp(dir / "e.log").find("depth") != std::string::npos);
}

TEST_CASE("CLI ablation output schemas") {
  const fs::path dir = test::scratch_dir("ablate");
  const std::string common = " --scenario \"" + test::scenario_path("open").string() +
                             "\" --episodes 2 --batch 2 --minibatch 2 --pretrain-steps 1"
                             " --eval-episodes 2 --seeds 1 2 --out \"" +
                             dir.string() + "\"";
  REQUIRE(run_cli("ablate reward" + common, dir / "r.log") == 0);
  const auto reward = parse_csv(slurp(dir / "reward_ablation.csv"));
  REQUIRE(!reward.empty());
  CHECK(reward[0] == std::vector<std::string>{"seed", "metric", "distance", "full"});
  for (std::size_t i = 1; i < reward.size(); ++i) CHECK(reward[i].size() == 4);

  REQUIRE(run_cli("ablate entropy" + common, dir / "e.log") == 0);
  const auto entropy = parse_csv(slurp(dir / "entropy_ablation.csv"));
  REQUIRE(!entropy.empty());
  CHECK(entropy[0].size() == 5);
  CHECK(entropy[0][0] == "seed");
  CHECK(entropy[0][1] == "episode");
  CHECK(entropy.size() == 1 + 2 * 2);
}

}  // TEST_SUITE
