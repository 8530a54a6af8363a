#pragma once

#include <cstdint>
#include <vector>

#include "ippo/autodiff.hpp"

namespace ippo {

struct AdamOptions {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adaptive-moment optimiser over a fixed list of parameter tensors.
class Adam {
 public:
  Adam(std::vector<ad::Tensor> params, AdamOptions options = {});

  /// Applies one update from the accumulated gradients.
  void step();
  void zero_grad();

  /// L2 norm of the accumulated gradients across all parameters.
  double grad_norm() const;

  const AdamOptions& options() const { return options_; }
  void set_learning_rate(double lr) { options_.learning_rate = lr; }
  std::int64_t step_count() const { return steps_; }
  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }

 private:
  std::vector<ad::Tensor> params_;
  AdamOptions options_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::int64_t steps_ = 0;
};

/// Backpropagates a scalar loss, steps the optimiser, then clears gradients.
void backward_and_step(const ad::Tensor& loss, Adam& optimizer);

}  // namespace ippo
