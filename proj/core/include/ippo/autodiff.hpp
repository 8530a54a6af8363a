#pragma once

// Minimal reverse-mode automatic differentiation over dense double tensors.
//
// A Tensor is a shared handle to a graph node. Operations on tensors that
// require gradients record their inputs and a backward closure; calling
// backward() on a scalar result sweeps the graph in reverse topological order
// and accumulates gradients into every leaf that requires them. Leaf
// gradients accumulate across calls until zero_grad().
//
// Layouts are row-major: matrices are [rows, cols], images [N, C, H, W].

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace ippo::ad {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape);

namespace detail {
struct Node;
}

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor scalar(double value);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t dim(std::size_t axis) const { return shape().at(axis); }
  std::size_t rank() const { return shape().size(); }
  std::size_t size() const;

  std::span<const double> data() const;
  std::span<double> data_mut();
  /// Empty until a backward pass reaches this tensor.
  std::span<const double> grad() const;
  std::span<double> grad_mut();
  bool requires_grad() const;

  double item() const;

  /// Reverse sweep from this scalar. Throws ShapeError for non-scalars.
  void backward() const;
  void zero_grad() const;

  /// New leaf holding a copy of the values.
  Tensor detach(bool requires_grad = false) const;

  bool same_node(const Tensor& other) const { return node_ == other.node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;

  friend struct detail::Node;
  friend Tensor make_op(Shape, std::vector<double>, std::vector<Tensor>,
                        std::function<void(detail::Node&)>);
  friend detail::Node& node_of(const Tensor&);
};

/// Disables graph recording on this thread for the guard's lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

// Elementwise (same shape).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor minimum(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);
Tensor exp(const Tensor& a);
Tensor square(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
/// Gradient passes only where lo <= a <= hi.
Tensor clamp(const Tensor& a, double lo, double hi);

// Reductions to a scalar.
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

Tensor reshape(const Tensor& a, Shape shape);

/// x [n, in] * weight [in, out] + bias [out] -> [n, out].
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

/// x [n, c, h, w], weight [o, c, k, k], bias [o].
Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias,
              std::size_t stride, std::size_t padding);

/// Adjoint of conv2d. x [n, c, h, w], weight [c, o, k, k], bias [o].
/// Output extent is (in - 1) * stride - 2 * padding + k + output_padding.
Tensor conv_transpose2d(const Tensor& x, const Tensor& weight,
                        const Tensor& bias, std::size_t stride,
                        std::size_t padding, std::size_t output_padding_h,
                        std::size_t output_padding_w);

/// [n, p] ++ [n, q] -> [n, p + q].
Tensor concat_cols(const Tensor& a, const Tensor& b);
/// Row-wise log-softmax of [n, m].
Tensor log_softmax(const Tensor& logits);
/// out[i] = x[i, index[i]].
Tensor gather_cols(const Tensor& x, std::span<const int> index);
/// [n, m] -> [n].
Tensor row_sum(const Tensor& x);

}  // namespace ippo::ad
