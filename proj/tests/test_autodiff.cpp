#include <doctest.h>

#include <cmath>
#include <functional>

#include "ippo/autodiff.hpp"
#include "ippo/errors.hpp"
#include "ippo/gradcheck.hpp"
#include "ippo/optimizer.hpp"
#include "ippo/random.hpp"
#include "checks.hpp"

using namespace ippo;
using ad::Tensor;
using test::random_tensor;


TEST_SUITE("autodiff") {

TEST_CASE("tensor construction and shape errors") {
  const Tensor z = Tensor::zeros({2, 3});
  CHECK(z.size() == 6);
  CHECK(z.rank() == 2);
  CHECK_FALSE(z.requires_grad());
  CHECK(Tensor::scalar(2.5).item() == 2.5);
  CHECK_THROWS_AS(Tensor::from({2, 2}, {1, 2, 3}), ShapeError);
  CHECK_THROWS_AS(ad::add(Tensor::zeros({2}), Tensor::zeros({3})), ShapeError);
  CHECK_THROWS_AS(z.item(), ShapeError);
  CHECK_THROWS_AS(z.backward(), ShapeError);
  CHECK_THROWS_AS(ad::reshape(z, {4}), ShapeError);
  CHECK_THROWS_AS(ad::linear(Tensor::zeros({2, 3}), Tensor::zeros({4, 5}),
                             Tensor::zeros({5})),
                  ShapeError);
}

TEST_CASE("forward values of elementary ops") {
  const Tensor a = Tensor::from({3}, {-1.0, 0.5, 2.0});
  const Tensor b = Tensor::from({3}, {2.0, 0.5, -1.0});
  CHECK(ad::add(a, b).data()[2] == 1.0);
  CHECK(ad::sub(a, b).data()[0] == -3.0);
  CHECK(ad::mul(a, b).data()[1] == 0.25);
  CHECK(ad::minimum(a, b).data()[2] == -1.0);
  CHECK(ad::relu(a).data()[0] == 0.0);
  CHECK(ad::clamp(a, 0.0, 1.0).data()[2] == 1.0);
  CHECK(ad::sum(a).item() == 1.5);
  CHECK(ad::mean(a).item() == 0.5);
  CHECK(ad::sigmoid(Tensor::scalar(0.0)).item() == 0.5);
  const Tensor m = Tensor::from({2, 2}, {1, 2, 3, 4});
  const Tensor ls = ad::log_softmax(m);
  CHECK(std::exp(ls.data()[0]) + std::exp(ls.data()[1]) == doctest::Approx(1.0));
  const int idx[2] = {1, 0};
  const Tensor g = ad::gather_cols(m, idx);
  CHECK(g.data()[0] == 2.0);
  CHECK(g.data()[1] == 3.0);
  CHECK(ad::row_sum(m).data()[1] == 7.0);
  CHECK(ad::concat_cols(m, m).dim(1) == 4);
}

TEST_CASE("loss = sum(params) gives unit gradients") {
  Rng rng(1);
  const Tensor p = random_tensor({4, 3}, rng);
  Adam opt({p}, {0.0});
  ad::sum(p).backward();
  for (double g : p.grad()) CHECK(g == 1.0);
  CHECK(opt.grad_norm() == doctest::Approx(std::sqrt(12.0)));
}

TEST_CASE("loss = 0 * params leaves parameters unchanged") {
  Rng rng(2);
  const Tensor p = random_tensor({5}, rng);
  const std::vector<double> before(p.data().begin(), p.data().end());
  Adam opt({p}, {1e-2});
  backward_and_step(ad::sum(ad::scale(p, 0.0)), opt);
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(p.data()[i] == before[i]);
  CHECK(opt.step_count() == 1);
  for (double g : p.grad()) CHECK(g == 0.0);
  CHECK_THROWS_AS(backward_and_step(p, opt), ShapeError);
}

TEST_CASE("gradients accumulate until zero_grad") {
  const Tensor p = Tensor::from({2}, {1.0, 2.0}, true);
  ad::sum(ad::square(p)).backward();
  ad::sum(ad::square(p)).backward();
  CHECK(p.grad()[1] == 8.0);
  p.zero_grad();
  for (double g : p.grad()) CHECK(g == 0.0);
}

TEST_CASE("no-grad guard records nothing and restores on exit") {
  const Tensor p = Tensor::from({2}, {1.0, 2.0}, true);
  {
    ad::NoGradGuard guard;
    CHECK_FALSE(ad::grad_enabled());
    const Tensor y = ad::sum(ad::square(p));
    CHECK_FALSE(y.requires_grad());
  }
  CHECK(ad::grad_enabled());
  const Tensor d = p.detach();
  CHECK_FALSE(d.requires_grad());
  CHECK_FALSE(d.same_node(p));
  CHECK(d.data()[1] == 2.0);
}

TEST_CASE("shared sub-expressions receive summed gradients") {
  const Tensor x = Tensor::from({1}, {3.0}, true);
  const Tensor y = ad::mul(x, x);
  ad::sum(ad::add(y, y)).backward();
  CHECK(x.grad()[0] == doctest::Approx(12.0));
}

TEST_CASE("quadratic bowl: central differences agree to 1e-6") {
  Rng rng(3);
  const Tensor p = random_tensor({10}, rng);
  const double err = finite_diff_check([&] { return ad::sum(ad::square(p)); }, {p});
  CHECK(err < 1e-6);
}

TEST_CASE("softmax cross-entropy head agrees to 1e-4") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const Tensor x = random_tensor({5, 6}, rng, -1, 1, false);
    const Tensor w = random_tensor({6, 8}, rng);
    const Tensor b = random_tensor({8}, rng);
    std::vector<int> labels(5);
    for (int& l : labels) l = static_cast<int>(rng.below(8));
    const double err = finite_diff_check(
        [&] {
          return ad::scale(
              ad::mean(ad::gather_cols(ad::log_softmax(ad::linear(x, w, b)), labels)),
              -1.0);
        },
        {w, b});
    CHECK(err < 1e-4);
  }
}

TEST_CASE("every layer type passes the finite-difference check on 20 seeds") {
  for (const auto& [name, err] : test::layer_gradient_errors(20)) {
    CAPTURE(name);
    CHECK(err < 1e-3);
  }
}

TEST_CASE("conv2d matches a direct convolution sum") {
  Rng rng(8);
  const Tensor x = random_tensor({1, 2, 5, 5}, rng, -1, 1, false);
  const Tensor w = random_tensor({3, 2, 3, 3}, rng, -1, 1, false);
  const Tensor b = random_tensor({3}, rng, -1, 1, false);
  const Tensor y = ad::conv2d(x, w, b, 2, 1);
  REQUIRE(y.shape() == ad::Shape{1, 3, 3, 3});
  for (int o = 0; o < 3; ++o) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        double acc = b.data()[o];
        for (int c = 0; c < 2; ++c) {
          for (int ki = 0; ki < 3; ++ki) {
            for (int kj = 0; kj < 3; ++kj) {
              const int r = 2 * i - 1 + ki;
              const int s = 2 * j - 1 + kj;
              if (r < 0 || r >= 5 || s < 0 || s >= 5) continue;
              acc += w.data()[((o * 2 + c) * 3 + ki) * 3 + kj] *
                     x.data()[(c * 5 + r) * 5 + s];
            }
          }
        }
        CHECK(y.data()[(o * 3 + i) * 3 + j] == doctest::Approx(acc).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("conv_transpose2d is the adjoint of conv2d") {
  // <conv(x), y> == <x, convT(y)> with zero biases and shared weights.
  Rng rng(9);
  const Tensor x = random_tensor({1, 2, 6, 6}, rng, -1, 1, false);
  const Tensor w = random_tensor({3, 2, 3, 3}, rng, -1, 1, false);
  const Tensor y = random_tensor({1, 3, 3, 3}, rng, -1, 1, false);
  const Tensor cx = ad::conv2d(x, w, Tensor::zeros({3}), 2, 1);
  const Tensor ty = ad::conv_transpose2d(y, w, Tensor::zeros({2}), 2, 1, 1, 1);
  REQUIRE(ty.shape() == x.shape());
  CHECK(ad::sum(ad::mul(cx, y)).item() ==
        doctest::Approx(ad::sum(ad::mul(x, ty)).item()).epsilon(1e-12));
}

TEST_CASE("Adam: first step moves each coordinate by lr against the gradient sign") {
  const Tensor p = Tensor::from({3}, {1.0, -2.0, 0.5}, true);
  Adam opt({p}, {0.1});
  backward_and_step(ad::sum(ad::mul(p, Tensor::from({3}, {2.0, -3.0, 0.0}))), opt);
  CHECK(p.data()[0] == doctest::Approx(0.9));
  CHECK(p.data()[1] == doctest::Approx(-1.9));
  CHECK(p.data()[2] == 0.5);
  REQUIRE(opt.first_moments().size() == 1);
  CHECK(opt.first_moments()[0].size() == 3);
  CHECK(opt.second_moments()[0].size() == 3);
}

TEST_CASE("Adam trajectories are bit-identical for identical inputs") {
  auto run = [] {
    Rng rng(4);
    const Tensor p = random_tensor({6}, rng);
    Adam opt({p}, {0.05});
    for (int i = 0; i < 50; ++i) {
      backward_and_step(ad::sum(ad::exp(ad::mul(p, p))), opt);
    }
    return std::vector<double>(p.data().begin(), p.data().end());
  };
  CHECK(run() == run());
}

}  // TEST_SUITE
