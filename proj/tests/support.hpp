#pragma once

#include <filesystem>
#include <string>

#include "ippo/networks.hpp"
#include "ippo/random.hpp"
#include "ippo/world.hpp"

namespace ippo::test {

inline std::filesystem::path scenario_path(const std::string& name) {
  return std::filesystem::path(IPPO_SCENARIO_DIR) / (name + ".scn");
}

/// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("ippo_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline ScenarioSpec open_field(Vec2 target, double capture = 30.0) {
  ScenarioSpec s;
  s.field.bounds = {{-5000, -5000}, {5000, 5000}};
  s.target = target;
  s.capture_radius = capture;
  s.d_max = 4000.0;
  return s;
}

/// Small parameter set (8x8 depth) for fast gradient and trainer tests.
inline NetworkParameters small_params(std::uint64_t seed) {
  NetworkConfig cfg;
  cfg.depth_height = 8;
  cfg.depth_width = 8;
  return init_parameters(cfg, seed);
}

inline void zero_all(NetworkParameters& p) {
  for (auto& e : p.entries()) {
    if (e.name.rfind("meta.", 0) == 0) continue;
    ad::Tensor t = e.tensor;
    for (double& v : t.data_mut()) v = 0.0;
  }
}

inline std::vector<double> random_state(Rng& rng) {
  std::vector<double> s(kStateDim);
  for (double& v : s) v = rng.uniform(-1.0, 1.0);
  return s;
}

}  // namespace ippo::test
