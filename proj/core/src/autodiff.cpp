#include "ippo/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "ippo/errors.hpp"

namespace ippo::ad {

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward;

  std::vector<double>& grad_buffer() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

}  // namespace detail

using detail::Node;

namespace {

thread_local bool g_grad_enabled = true;

std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " +
                     shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
}

void require_rank(const Tensor& a, std::size_t rank, const char* op) {
  if (a.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " +
                     std::to_string(rank) + ", got " + shape_str(a.shape()));
  }
}

}  // namespace

Node& node_of(const Tensor& t) {
  if (!t.node_) throw ShapeError("use of undefined tensor");
  return *t.node_;
}

// Builds a result node. The backward closure is kept only when recording is
// enabled and at least one input needs a gradient.
Tensor make_op(Shape shape, std::vector<double> value,
               std::vector<Tensor> inputs,
               std::function<void(detail::Node&)> backward) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  bool needs = false;
  if (g_grad_enabled) {
    for (const auto& in : inputs) needs = needs || in.requires_grad();
  }
  if (needs) {
    node->requires_grad = true;
    node->inputs.reserve(inputs.size());
    for (const auto& in : inputs) node->inputs.push_back(in.node_);
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  const auto n = element_count(shape);
  return from(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<double> values,
                    bool requires_grad) {
  if (element_count(shape) != values.size()) {
    throw ShapeError("tensor: " + std::to_string(values.size()) +
                     " values for shape " + shape_str(shape));
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value) { return from({}, {value}); }

const Shape& Tensor::shape() const { return node_of(*this).shape; }
std::size_t Tensor::size() const { return node_of(*this).value.size(); }
std::span<const double> Tensor::data() const { return node_of(*this).value; }
std::span<double> Tensor::data_mut() { return node_of(*this).value; }
std::span<const double> Tensor::grad() const { return node_of(*this).grad; }
std::span<double> Tensor::grad_mut() { return node_of(*this).grad_buffer(); }
bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item() on non-scalar " + shape_str(shape()));
  return node_->value[0];
}

void Tensor::zero_grad() const {
  auto& g = node_of(*this).grad;
  std::fill(g.begin(), g.end(), 0.0);
}

Tensor Tensor::detach(bool requires_grad) const {
  return from(shape(), node_of(*this).value, requires_grad);
}

void Tensor::backward() const {
  Node& root = node_of(*this);
  if (root.value.size() != 1) {
    throw ShapeError("backward() needs a scalar loss, got " +
                     shape_str(root.shape));
  }
  if (!root.requires_grad) return;

  // Iterative post-order DFS gives a topological order (inputs first).
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{&root, 0}};
  seen.insert(&root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (child->requires_grad && seen.insert(child).second) {
        stack.emplace_back(child, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root.grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward && !n->grad.empty()) n->backward(*n);
  }
  // Interior buffers are single-use; leaves keep accumulating.
  for (Node* n : order) {
    if (n->backward) {
      n->grad.clear();
    }
  }
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) {
  g_grad_enabled = false;
}
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_enabled() { return g_grad_enabled; }

// ---------------------------------------------------------------------------
// Elementwise

namespace {

// Shared shape for unary maps where d(out)/d(in) depends on (in, out).
template <typename Fwd, typename Deriv>
Tensor unary(const Tensor& a, Fwd fwd, Deriv deriv) {
  const auto in = a.data();
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = fwd(in[i]);
  return make_op(a.shape(), std::move(out), {a}, [deriv](Node& self) {
    Node& x = *self.inputs[0];
    if (!x.requires_grad) return;
    auto& gx = x.grad_buffer();
    for (std::size_t i = 0; i < gx.size(); ++i) {
      gx[i] += self.grad[i] * deriv(x.value[i], self.value[i]);
    }
  });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  return make_op(a.shape(), std::move(out), {a, b}, [](Node& self) {
    for (auto& in : self.inputs) {
      if (!in->requires_grad) continue;
      auto& g = in->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
  return make_op(a.shape(), std::move(out), {a, b}, [](Node& self) {
    if (self.inputs[0]->requires_grad) {
      auto& g = self.inputs[0]->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (self.inputs[1]->requires_grad) {
      auto& g = self.inputs[1]->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
  return make_op(a.shape(), std::move(out), {a, b}, [](Node& self) {
    Node& x = *self.inputs[0];
    Node& y = *self.inputs[1];
    if (x.requires_grad) {
      auto& g = x.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * y.value[i];
    }
    if (y.requires_grad) {
      auto& g = y.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * x.value[i];
    }
  });
}

Tensor minimum(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "minimum");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::min(a.data()[i], b.data()[i]);
  }
  // Ties route the gradient to the first argument.
  return make_op(a.shape(), std::move(out), {a, b}, [](Node& self) {
    Node& x = *self.inputs[0];
    Node& y = *self.inputs[1];
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const bool first = x.value[i] <= y.value[i];
      Node& target = first ? x : y;
      if (target.requires_grad) target.grad_buffer()[i] += self.grad[i];
    }
  });
}

Tensor scale(const Tensor& a, double s) {
  return unary(
      a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Tensor add_scalar(const Tensor& a, double s) {
  return unary(
      a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Tensor exp(const Tensor& a) {
  return unary(
      a, [](double x) { return std::exp(x); },
      [](double, double y) { return y; });
}

Tensor square(const Tensor& a) {
  return unary(
      a, [](double x) { return x * x; },
      [](double x, double) { return 2.0 * x; });
}

Tensor tanh(const Tensor& a) {
  return unary(
      a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor relu(const Tensor& a) {
  return unary(
      a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor sigmoid(const Tensor& a) {
  return unary(
      a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor clamp(const Tensor& a, double lo, double hi) {
  return unary(
      a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
      [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

// ---------------------------------------------------------------------------
// Reductions and reshapes

Tensor sum(const Tensor& a) {
  double total = 0.0;
  for (double v : a.data()) total += v;
  return make_op({}, {total}, {a}, [](Node& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (auto& v : g) v += self.grad[0];
  });
}

Tensor mean(const Tensor& a) {
  if (a.size() == 0) throw ShapeError("mean of empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (element_count(shape) != a.size()) {
    throw ShapeError("reshape: " + shape_str(a.shape()) + " -> " +
                     shape_str(shape));
  }
  std::vector<double> out(a.data().begin(), a.data().end());
  return make_op(std::move(shape), std::move(out), {a}, [](Node& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "concat_cols");
  require_rank(b, 2, "concat_cols");
  const std::size_t n = a.dim(0);
  if (b.dim(0) != n) throw ShapeError("concat_cols: row count mismatch");
  const std::size_t p = a.dim(1);
  const std::size_t q = b.dim(1);
  std::vector<double> out(n * (p + q));
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(a.data().begin() + i * p, p, out.begin() + i * (p + q));
    std::copy_n(b.data().begin() + i * q, q, out.begin() + i * (p + q) + p);
  }
  return make_op({n, p + q}, std::move(out), {a, b}, [n, p, q](Node& self) {
    Node& x = *self.inputs[0];
    Node& y = *self.inputs[1];
    for (std::size_t i = 0; i < n; ++i) {
      const double* g = self.grad.data() + i * (p + q);
      if (x.requires_grad) {
        auto& gx = x.grad_buffer();
        for (std::size_t j = 0; j < p; ++j) gx[i * p + j] += g[j];
      }
      if (y.requires_grad) {
        auto& gy = y.grad_buffer();
        for (std::size_t j = 0; j < q; ++j) gy[i * q + j] += g[p + j];
      }
    }
  });
}

Tensor row_sum(const Tensor& x) {
  require_rank(x, 2, "row_sum");
  const std::size_t n = x.dim(0);
  const std::size_t m = x.dim(1);
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) out[i] += x.data()[i * m + j];
  }
  return make_op({n}, std::move(out), {x}, [n, m](Node& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) g[i * m + j] += self.grad[i];
    }
  });
}

Tensor log_softmax(const Tensor& logits) {
  require_rank(logits, 2, "log_softmax");
  const std::size_t n = logits.dim(0);
  const std::size_t m = logits.dim(1);
  const auto in = logits.data();
  std::vector<double> out(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = in.data() + i * m;
    const double mx = *std::max_element(row, row + m);
    double z = 0.0;
    for (std::size_t j = 0; j < m; ++j) z += std::exp(row[j] - mx);
    const double lse = mx + std::log(z);
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] = row[j] - lse;
  }
  return make_op({n, m}, std::move(out), {logits}, [n, m](Node& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < n; ++i) {
      const double* gy = self.grad.data() + i * m;
      const double* y = self.value.data() + i * m;
      double gsum = 0.0;
      for (std::size_t j = 0; j < m; ++j) gsum += gy[j];
      for (std::size_t j = 0; j < m; ++j) {
        g[i * m + j] += gy[j] - std::exp(y[j]) * gsum;
      }
    }
  });
}

Tensor gather_cols(const Tensor& x, std::span<const int> index) {
  require_rank(x, 2, "gather_cols");
  const std::size_t n = x.dim(0);
  const std::size_t m = x.dim(1);
  if (index.size() != n) throw ShapeError("gather_cols: index length mismatch");
  std::vector<std::size_t> cols(n);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (index[i] < 0 || static_cast<std::size_t>(index[i]) >= m) {
      throw ShapeError("gather_cols: index out of range");
    }
    cols[i] = static_cast<std::size_t>(index[i]);
    out[i] = x.data()[i * m + cols[i]];
  }
  return make_op({n}, std::move(out), {x}, [cols, m](Node& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < cols.size(); ++i) {
      g[i * m + cols[i]] += self.grad[i];
    }
  });
}

// ---------------------------------------------------------------------------
// Layers

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require_rank(x, 2, "linear");
  require_rank(weight, 2, "linear");
  const std::size_t n = x.dim(0);
  const std::size_t in = x.dim(1);
  const std::size_t out_dim = weight.dim(1);
  if (weight.dim(0) != in) {
    throw ShapeError("linear: input " + shape_str(x.shape()) +
                     " vs weight " + shape_str(weight.shape()));
  }
  if (bias.size() != out_dim) throw ShapeError("linear: bias size mismatch");

  const double* xv = x.data().data();
  const double* wv = weight.data().data();
  const double* bv = bias.data().data();
  std::vector<double> out(n * out_dim);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = out.data() + i * out_dim;
    std::copy_n(bv, out_dim, row);
    for (std::size_t k = 0; k < in; ++k) {
      const double xik = xv[i * in + k];
      if (xik == 0.0) continue;
      const double* wrow = wv + k * out_dim;
      for (std::size_t j = 0; j < out_dim; ++j) row[j] += xik * wrow[j];
    }
  }

  return make_op({n, out_dim}, std::move(out), {x, weight, bias},
                 [n, in, out_dim](Node& self) {
    Node& xn = *self.inputs[0];
    Node& wn = *self.inputs[1];
    Node& bn = *self.inputs[2];
    const double* g = self.grad.data();
    if (xn.requires_grad) {
      auto& gx = xn.grad_buffer();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < in; ++k) {
          const double* wrow = wn.value.data() + k * out_dim;
          double acc = 0.0;
          for (std::size_t j = 0; j < out_dim; ++j) acc += g[i * out_dim + j] * wrow[j];
          gx[i * in + k] += acc;
        }
      }
    }
    if (wn.requires_grad) {
      auto& gw = wn.grad_buffer();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < in; ++k) {
          const double xik = xn.value[i * in + k];
          if (xik == 0.0) continue;
          double* gwrow = gw.data() + k * out_dim;
          for (std::size_t j = 0; j < out_dim; ++j) gwrow[j] += xik * g[i * out_dim + j];
        }
      }
    }
    if (bn.requires_grad) {
      auto& gb = bn.grad_buffer();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < out_dim; ++j) gb[j] += g[i * out_dim + j];
      }
    }
  });
}

namespace {

struct ConvGeometry {
  std::size_t n, c_in, h_in, w_in, c_out, k, h_out, w_out, stride, pad;
};

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias,
              std::size_t stride, std::size_t padding) {
  require_rank(x, 4, "conv2d");
  require_rank(weight, 4, "conv2d");
  if (stride == 0) throw ShapeError("conv2d: stride must be >= 1");
  const std::size_t k = weight.dim(2);
  if (weight.dim(3) != k || weight.dim(1) != x.dim(1)) {
    throw ShapeError("conv2d: weight " + shape_str(weight.shape()) +
                     " incompatible with input " + shape_str(x.shape()));
  }
  if (bias.size() != weight.dim(0)) throw ShapeError("conv2d: bias size");
  if (x.dim(2) + 2 * padding < k || x.dim(3) + 2 * padding < k) {
    throw ShapeError("conv2d: input smaller than kernel");
  }
  const ConvGeometry geo{x.dim(0),
                         x.dim(1),
                         x.dim(2),
                         x.dim(3),
                         weight.dim(0),
                         k,
                         (x.dim(2) + 2 * padding - k) / stride + 1,
                         (x.dim(3) + 2 * padding - k) / stride + 1,
                         stride,
                         padding};

  const double* xv = x.data().data();
  const double* wv = weight.data().data();
  const double* bv = bias.data().data();
  std::vector<double> out(geo.n * geo.c_out * geo.h_out * geo.w_out);

  // Visits every (output, input, weight) index triple that contributes.
  auto for_each_tap = [geo](auto&& fn) {
    const auto pad = static_cast<std::ptrdiff_t>(geo.pad);
    for (std::size_t b = 0; b < geo.n; ++b)
      for (std::size_t o = 0; o < geo.c_out; ++o)
        for (std::size_t oy = 0; oy < geo.h_out; ++oy)
          for (std::size_t ox = 0; ox < geo.w_out; ++ox) {
            const std::size_t oi =
                ((b * geo.c_out + o) * geo.h_out + oy) * geo.w_out + ox;
            for (std::size_t c = 0; c < geo.c_in; ++c)
              for (std::size_t ky = 0; ky < geo.k; ++ky) {
                const auto iy = static_cast<std::ptrdiff_t>(oy * geo.stride + ky) - pad;
                if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(geo.h_in)) continue;
                for (std::size_t kx = 0; kx < geo.k; ++kx) {
                  const auto ix = static_cast<std::ptrdiff_t>(ox * geo.stride + kx) - pad;
                  if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(geo.w_in)) continue;
                  const std::size_t ii =
                      ((b * geo.c_in + c) * geo.h_in + static_cast<std::size_t>(iy)) *
                          geo.w_in + static_cast<std::size_t>(ix);
                  const std::size_t wi = ((o * geo.c_in + c) * geo.k + ky) * geo.k + kx;
                  fn(oi, ii, wi, o);
                }
              }
          }
  };

  for (std::size_t b = 0; b < geo.n; ++b)
    for (std::size_t o = 0; o < geo.c_out; ++o)
      std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(
                                    (b * geo.c_out + o) * geo.h_out * geo.w_out),
                  geo.h_out * geo.w_out, bv[o]);
  for_each_tap([&](std::size_t oi, std::size_t ii, std::size_t wi, std::size_t) {
    out[oi] += xv[ii] * wv[wi];
  });

  return make_op({geo.n, geo.c_out, geo.h_out, geo.w_out}, std::move(out),
                 {x, weight, bias}, [for_each_tap](Node& self) {
    Node& xn = *self.inputs[0];
    Node& wn = *self.inputs[1];
    Node& bn = *self.inputs[2];
    const double* g = self.grad.data();
    double* gx = xn.requires_grad ? xn.grad_buffer().data() : nullptr;
    double* gw = wn.requires_grad ? wn.grad_buffer().data() : nullptr;
    const double* xv = xn.value.data();
    const double* wv = wn.value.data();
    for_each_tap([&](std::size_t oi, std::size_t ii, std::size_t wi, std::size_t) {
      if (gx) gx[ii] += g[oi] * wv[wi];
      if (gw) gw[wi] += g[oi] * xv[ii];
    });
    if (bn.requires_grad) {
      auto& gb = bn.grad_buffer();
      const std::size_t per_map = self.shape[2] * self.shape[3];
      for (std::size_t b = 0; b < self.shape[0]; ++b)
        for (std::size_t o = 0; o < self.shape[1]; ++o)
          for (std::size_t p = 0; p < per_map; ++p)
            gb[o] += g[(b * self.shape[1] + o) * per_map + p];
    }
  });
}

Tensor conv_transpose2d(const Tensor& x, const Tensor& weight,
                        const Tensor& bias, std::size_t stride,
                        std::size_t padding, std::size_t output_padding_h,
                        std::size_t output_padding_w) {
  require_rank(x, 4, "conv_transpose2d");
  require_rank(weight, 4, "conv_transpose2d");
  if (stride == 0) throw ShapeError("conv_transpose2d: stride must be >= 1");
  const std::size_t k = weight.dim(2);
  if (weight.dim(3) != k || weight.dim(0) != x.dim(1)) {
    throw ShapeError("conv_transpose2d: weight " + shape_str(weight.shape()) +
                     " incompatible with input " + shape_str(x.shape()));
  }
  const std::size_t c_out = weight.dim(1);
  if (bias.size() != c_out) throw ShapeError("conv_transpose2d: bias size");
  if (output_padding_h >= stride || output_padding_w >= stride) {
    throw ShapeError("conv_transpose2d: output padding must be < stride");
  }
  const auto full_h = (x.dim(2) - 1) * stride + k + output_padding_h;
  const auto full_w = (x.dim(3) - 1) * stride + k + output_padding_w;
  if (full_h <= 2 * padding || full_w <= 2 * padding) {
    throw ShapeError("conv_transpose2d: padding too large");
  }
  const std::size_t n = x.dim(0), c_in = x.dim(1), h_in = x.dim(2),
                    w_in = x.dim(3);
  const std::size_t h_out = full_h - 2 * padding;
  const std::size_t w_out = full_w - 2 * padding;

  auto for_each_tap = [=](auto&& fn) {
    const auto pad = static_cast<std::ptrdiff_t>(padding);
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = 0; c < c_in; ++c)
        for (std::size_t iy = 0; iy < h_in; ++iy)
          for (std::size_t ix = 0; ix < w_in; ++ix) {
            const std::size_t ii = ((b * c_in + c) * h_in + iy) * w_in + ix;
            for (std::size_t o = 0; o < c_out; ++o)
              for (std::size_t ky = 0; ky < k; ++ky) {
                const auto oy = static_cast<std::ptrdiff_t>(iy * stride + ky) - pad;
                if (oy < 0 || oy >= static_cast<std::ptrdiff_t>(h_out)) continue;
                for (std::size_t kx = 0; kx < k; ++kx) {
                  const auto ox = static_cast<std::ptrdiff_t>(ix * stride + kx) - pad;
                  if (ox < 0 || ox >= static_cast<std::ptrdiff_t>(w_out)) continue;
                  const std::size_t oi =
                      ((b * c_out + o) * h_out + static_cast<std::size_t>(oy)) * w_out +
                      static_cast<std::size_t>(ox);
                  const std::size_t wi = ((c * c_out + o) * k + ky) * k + kx;
                  fn(oi, ii, wi);
                }
              }
          }
  };

  const double* xv = x.data().data();
  const double* wv = weight.data().data();
  const double* bv = bias.data().data();
  std::vector<double> out(n * c_out * h_out * w_out);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t o = 0; o < c_out; ++o)
      std::fill_n(out.begin() + static_cast<std::ptrdiff_t>((b * c_out + o) * h_out * w_out),
                  h_out * w_out, bv[o]);
  for_each_tap([&](std::size_t oi, std::size_t ii, std::size_t wi) {
    out[oi] += xv[ii] * wv[wi];
  });

  return make_op({n, c_out, h_out, w_out}, std::move(out), {x, weight, bias},
                 [for_each_tap, n, c_out, h_out, w_out](Node& self) {
    Node& xn = *self.inputs[0];
    Node& wn = *self.inputs[1];
    Node& bn = *self.inputs[2];
    const double* g = self.grad.data();
    double* gx = xn.requires_grad ? xn.grad_buffer().data() : nullptr;
    double* gw = wn.requires_grad ? wn.grad_buffer().data() : nullptr;
    const double* xv = xn.value.data();
    const double* wv = wn.value.data();
    for_each_tap([&](std::size_t oi, std::size_t ii, std::size_t wi) {
      if (gx) gx[ii] += g[oi] * wv[wi];
      if (gw) gw[wi] += g[oi] * xv[ii];
    });
    if (bn.requires_grad) {
      auto& gb = bn.grad_buffer();
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t o = 0; o < c_out; ++o)
          for (std::size_t p = 0; p < h_out * w_out; ++p)
            gb[o] += g[(b * c_out + o) * h_out * w_out + p];
    }
  });
}

}  // namespace ippo::ad
