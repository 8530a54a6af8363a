#include "ippo/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ippo/random.hpp"

namespace ippo {

double finite_diff_check(const std::function<ad::Tensor()>& loss_fn,
                         const std::vector<ad::Tensor>& params,
                         const GradCheckOptions& options) {
  for (const auto& p : params) p.zero_grad();
  loss_fn().backward();

  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params) {
    const auto g = p.grad();
    analytic.emplace_back(g.begin(), g.end());
    if (analytic.back().empty()) analytic.back().assign(p.size(), 0.0);
  }

  Rng rng(options.seed);
  double worst = 0.0;
  ad::NoGradGuard no_grad;
  for (std::size_t t = 0; t < params.size(); ++t) {
    ad::Tensor p = params[t];
    std::vector<std::size_t> coords(p.size());
    std::iota(coords.begin(), coords.end(), 0);
    if (options.samples_per_tensor > 0 &&
        options.samples_per_tensor < coords.size()) {
      for (std::size_t i = 0; i < options.samples_per_tensor; ++i) {
        const auto j = i + rng.below(coords.size() - i);
        std::swap(coords[i], coords[j]);
      }
      coords.resize(options.samples_per_tensor);
    }
    for (std::size_t idx : coords) {
      double& w = p.data_mut()[idx];
      const double saved = w;
      w = saved + options.epsilon;
      const double up = loss_fn().item();
      w = saved - options.epsilon;
      const double down = loss_fn().item();
      w = saved;
      const double fd = (up - down) / (2.0 * options.epsilon);
      const double ga = analytic[t][idx];
      const double err =
          std::abs(ga - fd) / std::max(1e-8, std::abs(ga) + std::abs(fd));
      worst = std::max(worst, err);
    }
  }
  for (const auto& p : params) p.zero_grad();
  return worst;
}

}  // namespace ippo
