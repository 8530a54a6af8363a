#include <benchmark/benchmark.h>

#include <vector>

#include "ippo/autodiff.hpp"
#include "ippo/networks.hpp"

namespace {

void BM_EncodeDepth(benchmark::State& state) {
  const auto params = ippo::init_parameters({}, 1);
  const std::vector<double> depth(16 * 32, 0.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ippo::encode_depth(params, depth));
  }
}
BENCHMARK(BM_EncodeDepth);

void BM_PolicyForward(benchmark::State& state) {
  const auto params = ippo::init_parameters({}, 1);
  const std::vector<double> s(ippo::kStateDim, 0.1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ippo::policy_forward(params, s));
  }
}
BENCHMARK(BM_PolicyForward);

void BM_HeadsBackward(benchmark::State& state) {
  const auto params = ippo::init_parameters({}, 1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = ippo::ad::Tensor::from(
      {n, ippo::kStateDim}, std::vector<double>(n * ippo::kStateDim, 0.1));
  for (auto _ : state) {
    auto loss = ippo::ad::add(
        ippo::ad::mean(ippo::ad::log_softmax(ippo::policy_logits(params, x))),
        ippo::ad::mean(ippo::value_batch(params, x)));
    loss.backward();
    params.zero_grad();
  }
}
BENCHMARK(BM_HeadsBackward)->Arg(64)->Arg(256);

}  // namespace
