#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>

#include "ippo/autoencoder.hpp"
#include "ippo/checkpoint.hpp"
#include "ippo/errors.hpp"
#include "ippo/networks.hpp"
#include "ippo/optimizer.hpp"
#include "support.hpp"

using namespace ippo;
using ippo::test::random_state;
using ippo::test::small_params;
using ippo::test::zero_all;

namespace {

void fill(const ad::Tensor& t, double v) {
  ad::Tensor m = t;
  for (double& x : m.data_mut()) x = v;
}

SensorParams small_sensor() {
  SensorParams s;
  s.height = 8;
  s.width = 8;
  return s;
}

DepthMap random_map(Rng& rng) {
  const SensorParams s = small_sensor();
  std::vector<double> v(64);
  for (double& x : v) x = rng.uniform(10.0, s.max_range);
  return DepthMap(s, std::move(v));
}

// tanh(s W1 + b1) W2 + b2 from raw tensor data.
double value_oracle(const NetworkParameters& p, const std::vector<double>& s) {
  const auto w1 = p.get("value.fc1.weight").data();
  const auto b1 = p.get("value.fc1.bias").data();
  const auto w2 = p.get("value.fc2.weight").data();
  const std::size_t hid = b1.size();
  double out = p.get("value.fc2.bias").data()[0];
  for (std::size_t j = 0; j < hid; ++j) {
    double a = b1[j];
    for (std::size_t i = 0; i < s.size(); ++i) a += s[i] * w1[i * hid + j];
    out += std::tanh(a) * w2[j];
  }
  return out;
}

std::vector<double> flat_values(const NetworkParameters& p) {
  std::vector<double> out;
  for (const auto& e : p.entries()) {
    out.insert(out.end(), e.tensor.data().begin(), e.tensor.data().end());
  }
  return out;
}

}  // namespace

TEST_SUITE("networks") {

TEST_CASE("parameter inventory and config recovery") {
  const NetworkParameters p = init_parameters(NetworkConfig{}, 1);
  for (const char* name :
       {"meta.depth_shape", "encoder.conv1.weight", "encoder.fc.bias",
        "decoder.deconv2.weight", "policy.fc2.bias", "value.fc2.weight"}) {
    CHECK(p.contains(name));
  }
  const NetworkConfig cfg = p.config();
  CHECK(cfg.depth_height == 16);
  CHECK(cfg.depth_width == 32);
  CHECK(cfg.latent_dim == kLatentDim);
  CHECK(p.get("policy.fc2.weight").dim(1) == kActionCount);
  CHECK_THROWS_AS(p.get("nope"), Error);
  NetworkConfig bad;
  bad.latent_dim = 10;
  CHECK_THROWS_AS(init_parameters(bad, 1), ShapeError);
}

TEST_CASE("initialisation is seeded and bounded by fan-in") {
  const NetworkParameters a = init_parameters(NetworkConfig{}, 7);
  const NetworkParameters b = init_parameters(NetworkConfig{}, 7);
  const NetworkParameters c = init_parameters(NetworkConfig{}, 8);
  CHECK(flat_values(a) == flat_values(b));
  CHECK(flat_values(a) != flat_values(c));
  const double bound = 1.0 / std::sqrt(static_cast<double>(kStateDim));
  for (double v : a.get("policy.fc1.weight").data()) CHECK(std::abs(v) <= bound);
}

TEST_CASE("zero weights: uniform policy, value and latent equal their biases") {
  NetworkParameters p = small_params(3);
  zero_all(p);
  fill(p.get("value.fc2.bias"), 0.75);
  ad::Tensor fcb = p.get("encoder.fc.bias");
  for (std::size_t i = 0; i < fcb.size(); ++i) fcb.data_mut()[i] = 0.01 * i;
  Rng rng(1);
  const auto s = random_state(rng);
  const ActionDistribution d = policy_forward(p, s);
  for (double q : d.probs) CHECK(q == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(d.entropy() == doctest::Approx(std::log(8.0)));
  CHECK(value_forward(p, s) == doctest::Approx(0.75).epsilon(1e-15));
  const std::vector<double> depth(64, 0.4);
  const auto z = encode_depth(p, depth);
  REQUIRE(z.size() == kLatentDim);
  for (std::size_t i = 0; i < z.size(); ++i) CHECK(z[i] == doctest::Approx(0.01 * i));
}

TEST_CASE("policy outputs form a distribution on random states") {
  const NetworkParameters p = init_parameters(NetworkConfig{}, 5);
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = random_state(rng);
    const ActionDistribution d = policy_forward(p, s);
    double total = 0.0;
    for (std::size_t a = 0; a < kActionCount; ++a) {
      CHECK(d.probs[a] > 0.0);
      CHECK(d.log_probs[a] == doctest::Approx(std::log(d.probs[a])));
      total += d.probs[a];
    }
    CHECK(std::abs(total - 1.0) < 1e-9);
    for (double q : d.probs) CHECK(q <= d.probs[d.argmax()]);
    CHECK(d.entropy() >= 0.0);
    CHECK(d.entropy() <= std::log(8.0) + 1e-12);
  }
}

TEST_CASE("argmax follows the dominant logit bias") {
  NetworkParameters p = small_params(4);
  zero_all(p);
  ad::Tensor b = p.get("policy.fc2.bias");
  b.data_mut()[5] = 3.0;
  Rng rng(3);
  const ActionDistribution d = policy_forward(p, random_state(rng));
  CHECK(d.argmax() == 5);
  const double z = 7.0 + std::exp(3.0);
  CHECK(d.probs[5] == doctest::Approx(std::exp(3.0) / z));
}

TEST_CASE("value head matches a direct evaluation") {
  const NetworkParameters p = init_parameters(NetworkConfig{}, 11);
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = random_state(rng);
    CHECK(value_forward(p, s) == doctest::Approx(value_oracle(p, s)).epsilon(1e-12));
  }
}

TEST_CASE("forward passes are deterministic and batch-consistent") {
  const NetworkParameters p = init_parameters(NetworkConfig{}, 12);
  Rng rng(5);
  const auto s1 = random_state(rng);
  const auto s2 = random_state(rng);
  CHECK(policy_forward(p, s1).probs == policy_forward(p, s1).probs);
  std::vector<double> both(s1);
  both.insert(both.end(), s2.begin(), s2.end());
  ad::NoGradGuard guard;
  const ad::Tensor v = value_batch(p, ad::Tensor::from({2, kStateDim}, both));
  CHECK(v.data()[1] == doctest::Approx(value_forward(p, s2)).epsilon(1e-12));
}

TEST_CASE("invalid inputs are rejected") {
  const NetworkParameters p = small_params(6);
  std::vector<double> s(kStateDim, 0.0);
  CHECK_THROWS_AS(policy_forward(p, std::vector<double>(10)), ShapeError);
  CHECK_THROWS_AS(value_forward(p, std::vector<double>(300)), ShapeError);
  s[17] = std::nan("");
  CHECK_THROWS_AS(policy_forward(p, s), ValidationError);
  CHECK_THROWS_AS(encode_depth(p, std::vector<double>(63)), ShapeError);
}

TEST_CASE("encoder is Lipschitz-continuous in its input") {
  const NetworkParameters p = init_parameters(NetworkConfig{}, 13);
  Rng rng(6);
  std::vector<double> d(16 * 32);
  for (double& v : d) v = rng.uniform();
  const auto z0 = encode_depth(p, d);
  double prev_gap = 0.0;
  for (double eps : {1e-6, 1e-4, 1e-2}) {
    std::vector<double> dp(d);
    for (double& v : dp) v += eps;
    const auto z1 = encode_depth(p, dp);
    double gap = 0.0;
    for (std::size_t i = 0; i < z0.size(); ++i) gap = std::max(gap, std::abs(z1[i] - z0[i]));
    CHECK(gap < 1e4 * eps);
    CHECK(gap >= prev_gap);
    prev_gap = gap;
  }
}

TEST_CASE("autoencoder: repeated steps on one batch lower the loss") {
  NetworkParameters p = small_params(7);
  Rng rng(7);
  std::vector<DepthMap> batch;
  for (int i = 0; i < 4; ++i) batch.push_back(random_map(rng));
  Adam opt(autoencoder_parameters(p), {1e-2});
  const double first = reconstruction_loss(p, batch);
  double pre = 0.0;
  for (int i = 0; i < 60; ++i) pre = autoencoder_train_step(p, opt, batch);
  CHECK(pre < first);
  CHECK(reconstruction_loss(p, batch) < 0.5 * first);
  CHECK_THROWS_AS(autoencoder_train_step(p, opt, std::span<const DepthMap>{}),
                  ValidationError);
}

TEST_CASE("autoencoder: zero learning rate leaves parameters unchanged") {
  NetworkParameters p = small_params(8);
  const auto before = flat_values(p);
  Rng rng(8);
  std::vector<DepthMap> batch{random_map(rng)};
  Adam opt(autoencoder_parameters(p), {0.0});
  autoencoder_train_step(p, opt, batch);
  CHECK(flat_values(p) == before);
}

TEST_CASE("autoencoder: a constant half-range map is reconstructed exactly") {
  NetworkParameters p = small_params(9);
  for (const char* name : {"decoder.fc.weight", "decoder.fc.bias", "decoder.deconv1.weight",
                           "decoder.deconv1.bias", "decoder.deconv2.weight",
                           "decoder.deconv2.bias"}) {
    fill(p.get(name), 0.0);
  }
  const SensorParams s = small_sensor();
  std::vector<DepthMap> batch{DepthMap(s, std::vector<double>(64, 0.5 * s.max_range))};
  CHECK(reconstruction_loss(p, batch) == 0.0);
}

TEST_CASE("autoencoder: latent standardisation preserves reconstructions") {
  NetworkParameters p = small_params(10);
  Rng rng(10);
  std::vector<DepthMap> maps;
  for (int i = 0; i < 24; ++i) maps.push_back(random_map(rng));
  const double before = reconstruction_loss(p, maps);
  standardize_latent(p, maps);
  CHECK(reconstruction_loss(p, maps) == doctest::Approx(before).epsilon(1e-9));
  std::vector<double> mean(kLatentDim, 0.0), sq(kLatentDim, 0.0);
  for (const DepthMap& m : maps) {
    const auto z = encode_depth(p, m.normalized());
    for (std::size_t i = 0; i < kLatentDim; ++i) {
      mean[i] += z[i] / maps.size();
      sq[i] += z[i] * z[i] / maps.size();
    }
  }
  for (std::size_t i = 0; i < kLatentDim; ++i) {
    CHECK(std::abs(mean[i]) < 1e-9);
    const double var = sq[i] - mean[i] * mean[i];
    if (var > 1e-12) CHECK(var == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("checkpoint round trip rounds to float and is byte-stable") {
  const NetworkParameters p = init_parameters(NetworkConfig{}, 21);
  const auto dir = ippo::test::scratch_dir("ckpt");
  save_checkpoint(p, dir / "a.ippo");
  const NetworkParameters q = load_checkpoint(dir / "a.ippo");
  REQUIRE(q.entries().size() == p.entries().size());
  for (std::size_t i = 0; i < p.entries().size(); ++i) {
    const auto& a = p.entries()[i];
    const auto& b = q.entries()[i];
    CHECK(a.name == b.name);
    CHECK(a.tensor.shape() == b.tensor.shape());
    for (std::size_t k = 0; k < a.tensor.size(); ++k) {
      REQUIRE(b.tensor.data()[k] ==
              static_cast<double>(static_cast<float>(a.tensor.data()[k])));
    }
  }
  save_checkpoint(q, dir / "b.ippo");
  CHECK(encode_checkpoint(p) == encode_checkpoint(q));
  std::ifstream fa(dir / "a.ippo", std::ios::binary), fb(dir / "b.ippo", std::ios::binary);
  const std::string sa((std::istreambuf_iterator<char>(fa)), {});
  const std::string sb((std::istreambuf_iterator<char>(fb)), {});
  CHECK(sa == sb);
}

TEST_CASE("checkpoint: meta tensors load as non-trainable") {
  const NetworkParameters q = decode_checkpoint(encode_checkpoint(small_params(22)));
  CHECK_FALSE(q.get("meta.depth_shape").requires_grad());
  CHECK(q.get("encoder.fc.weight").requires_grad());
  CHECK(q.all().size() + 1 == q.entries().size());
  CHECK(q.config().depth_height == 8);
  Adam opt(q.all(), {});
  REQUIRE(opt.first_moments().size() == q.all().size());
  for (std::size_t i = 0; i < q.all().size(); ++i) {
    CHECK(opt.first_moments()[i].size() == q.all()[i].size());
  }
}

TEST_CASE("checkpoint: corruption is detected") {
  const auto bytes = encode_checkpoint(small_params(23));
  auto expect = [](std::vector<std::uint8_t> b, const std::string& what) {
    try {
      decode_checkpoint(b);
      FAIL("decode accepted corrupted bytes");
    } catch (const CheckpointError& e) {
      CHECK(std::string(e.what()).find(what) != std::string::npos);
    }
  };
  auto flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x40;
  expect(flipped, "CRC mismatch");
  auto versioned = bytes;
  versioned[4] = 2;
  expect(versioned, "unsupported checkpoint version 2");
  auto magic = bytes;
  magic[0] = 'X';
  expect(magic, "bad magic");
  expect(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 6), "truncated");
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/x.ippo"), CheckpointError);
}

TEST_CASE("crc32 of a known string") {
  const char* s = "123456789";
  const std::span<const std::uint8_t> b(reinterpret_cast<const std::uint8_t*>(s), 9);
  CHECK(crc32(b) == 0xCBF43926u);
}

}  // TEST_SUITE
