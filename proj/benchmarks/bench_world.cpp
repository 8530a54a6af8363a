#include <benchmark/benchmark.h>

#include "ippo/world.hpp"

namespace {

ippo::ObstacleField pillars(int n) {
  ippo::ObstacleField field;
  for (int i = 0; i < n; ++i) {
    field.circles.push_back({{100.0 + 40.0 * i, (i % 2 ? 1 : -1) * 30.0}, 12.0});
  }
  return field;
}

void BM_RaycastDepth(benchmark::State& state) {
  const auto field = pillars(static_cast<int>(state.range(0)));
  ippo::SensorParams sensor;
  const ippo::UavState uav{{0.0, 0.0}, 0.0, 30.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(ippo::raycast_depth(uav, field, sensor));
  }
}
BENCHMARK(BM_RaycastDepth)->Arg(5)->Arg(50);

void BM_StepToWaypoint(benchmark::State& state) {
  ippo::ScenarioSpec spec;
  spec.start = {0.0, 0.0};
  spec.target = {1000.0, 0.0};
  const ippo::UavState uav{{0.0, 0.0}, 0.0, 30.0};
  const ippo::KinematicParams kin;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        ippo::step_to_waypoint(uav, {75.0, 130.0}, spec, kin));
  }
}
BENCHMARK(BM_StepToWaypoint);

}  // namespace
