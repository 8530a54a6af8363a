#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ippo/autodiff.hpp"

namespace ippo {

struct GradCheckOptions {
  double epsilon = 1e-4;
  /// Coordinates sampled per tensor; 0 checks every coordinate.
  std::size_t samples_per_tensor = 0;
  std::uint64_t seed = 0;
};

/// Compares reverse-mode gradients of `loss_fn` against central differences.
/// Returns max |g_ad - g_fd| / max(1e-8, |g_ad| + |g_fd|) over the checked
/// coordinates. `loss_fn` must be deterministic and return a scalar.
double finite_diff_check(const std::function<ad::Tensor()>& loss_fn,
                         const std::vector<ad::Tensor>& params,
                         const GradCheckOptions& options = {});

}  // namespace ippo
