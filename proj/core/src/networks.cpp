#include "ippo/networks.hpp"

#include <algorithm>
#include <cmath>

#include "ippo/errors.hpp"
#include "ippo/random.hpp"

namespace ippo {

using ad::Tensor;

namespace {

constexpr std::size_t kKernel = 3;
constexpr std::size_t kStride = 2;
constexpr std::size_t kPadding = 1;

std::size_t halve(std::size_t n) { return (n + 1) / 2; }

// Output padding that makes a stride-2 transposed conv invert ceil(n / 2).
std::size_t output_padding_for(std::size_t target) { return target % 2 == 0 ? 1 : 0; }

Tensor uniform_tensor(ad::Shape shape, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::vector<double> values(ad::element_count(shape));
  for (auto& v : values) v = rng.uniform(-bound, bound);
  return Tensor::from(std::move(shape), std::move(values), true);
}

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw ValidationError(std::string(what) + ": non-finite state entry");
    }
  }
}

}  // namespace

std::size_t NetworkConfig::encoded_height() const {
  return halve(halve(depth_height));
}
std::size_t NetworkConfig::encoded_width() const {
  return halve(halve(depth_width));
}

void NetworkParameters::add(std::string name, Tensor tensor) {
  if (contains(name)) throw ValidationError("duplicate parameter " + name);
  entries_.push_back({std::move(name), std::move(tensor)});
}

const Tensor& NetworkParameters::get(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return e.tensor;
  }
  throw ShapeError("missing parameter " + std::string(name));
}

bool NetworkParameters::contains(std::string_view name) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const NamedTensor& e) { return e.name == name; });
}

std::vector<Tensor> NetworkParameters::group(std::string_view prefix) const {
  std::vector<Tensor> out;
  for (const auto& e : entries_) {
    if (e.name.starts_with(prefix)) out.push_back(e.tensor);
  }
  return out;
}

std::vector<Tensor> NetworkParameters::all() const {
  std::vector<Tensor> out;
  for (const auto& e : entries_) {
    if (e.tensor.requires_grad()) out.push_back(e.tensor);
  }
  return out;
}

std::size_t NetworkParameters::scalar_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.tensor.size();
  return n;
}

NetworkParameters NetworkParameters::clone() const {
  NetworkParameters out;
  for (const auto& e : entries_) {
    out.entries_.push_back({e.name, e.tensor.detach(e.tensor.requires_grad())});
  }
  return out;
}

void NetworkParameters::zero_grad() const {
  for (const auto& e : entries_) e.tensor.zero_grad();
}

void NetworkParameters::assign(const NetworkParameters& other) {
  if (other.entries_.size() != entries_.size()) {
    throw ShapeError("assign: parameter sets differ");
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    auto& dst = entries_[i];
    const auto& src = other.entries_[i];
    if (dst.name != src.name || dst.tensor.shape() != src.tensor.shape()) {
      throw ShapeError("assign: mismatch at " + dst.name);
    }
    std::copy(src.tensor.data().begin(), src.tensor.data().end(),
              dst.tensor.data_mut().begin());
  }
}

NetworkConfig NetworkParameters::config() const {
  NetworkConfig cfg;
  const auto meta = get("meta.depth_shape").data();
  cfg.depth_height = static_cast<std::size_t>(meta[0]);
  cfg.depth_width = static_cast<std::size_t>(meta[1]);
  cfg.conv1_channels = get("encoder.conv1.weight").dim(0);
  cfg.conv2_channels = get("encoder.conv2.weight").dim(0);
  cfg.latent_dim = get("encoder.fc.weight").dim(1);
  cfg.head_hidden = get("policy.fc1.weight").dim(1);
  return cfg;
}

NetworkParameters init_parameters(const NetworkConfig& cfg,
                                  std::uint64_t seed) {
  if (cfg.depth_height == 0 || cfg.depth_width == 0) {
    throw ShapeError("network config: empty depth map");
  }
  if (cfg.latent_dim + 2 != kStateDim) {
    throw ShapeError("network config: latent dim must be " +
                     std::to_string(kLatentDim));
  }
  Rng rng(seed);
  NetworkParameters p;
  const std::size_t c1 = cfg.conv1_channels;
  const std::size_t c2 = cfg.conv2_channels;
  const std::size_t flat = c2 * cfg.encoded_height() * cfg.encoded_width();
  const std::size_t k2 = kKernel * kKernel;
  const std::size_t hid = cfg.head_hidden;

  p.add("meta.depth_shape",
        Tensor::from({2}, {static_cast<double>(cfg.depth_height),
                           static_cast<double>(cfg.depth_width)}));

  p.add("encoder.conv1.weight", uniform_tensor({c1, 1, kKernel, kKernel}, k2, rng));
  p.add("encoder.conv1.bias", uniform_tensor({c1}, k2, rng));
  p.add("encoder.conv2.weight", uniform_tensor({c2, c1, kKernel, kKernel}, c1 * k2, rng));
  p.add("encoder.conv2.bias", uniform_tensor({c2}, c1 * k2, rng));
  p.add("encoder.fc.weight", uniform_tensor({flat, cfg.latent_dim}, flat, rng));
  p.add("encoder.fc.bias", uniform_tensor({cfg.latent_dim}, flat, rng));

  p.add("decoder.fc.weight", uniform_tensor({cfg.latent_dim, flat}, cfg.latent_dim, rng));
  p.add("decoder.fc.bias", uniform_tensor({flat}, cfg.latent_dim, rng));
  p.add("decoder.deconv1.weight", uniform_tensor({c2, c1, kKernel, kKernel}, c2 * k2, rng));
  p.add("decoder.deconv1.bias", uniform_tensor({c1}, c2 * k2, rng));
  p.add("decoder.deconv2.weight", uniform_tensor({c1, 1, kKernel, kKernel}, c1 * k2, rng));
  p.add("decoder.deconv2.bias", uniform_tensor({1}, c1 * k2, rng));

  p.add("policy.fc1.weight", uniform_tensor({kStateDim, hid}, kStateDim, rng));
  p.add("policy.fc1.bias", uniform_tensor({hid}, kStateDim, rng));
  p.add("policy.fc2.weight", uniform_tensor({hid, kActionCount}, hid, rng));
  p.add("policy.fc2.bias", uniform_tensor({kActionCount}, hid, rng));

  p.add("value.fc1.weight", uniform_tensor({kStateDim, hid}, kStateDim, rng));
  p.add("value.fc1.bias", uniform_tensor({hid}, kStateDim, rng));
  p.add("value.fc2.weight", uniform_tensor({hid, 1}, hid, rng));
  p.add("value.fc2.bias", uniform_tensor({1}, hid, rng));
  return p;
}

Tensor encoder_forward(const NetworkParameters& p, const Tensor& depth) {
  const NetworkConfig cfg = p.config();
  if (depth.rank() != 4 || depth.dim(1) != 1 ||
      depth.dim(2) != cfg.depth_height || depth.dim(3) != cfg.depth_width) {
    throw ShapeError("encoder: expected depth [n, 1, " +
                     std::to_string(cfg.depth_height) + ", " +
                     std::to_string(cfg.depth_width) + "]");
  }
  const std::size_t n = depth.dim(0);
  Tensor h = ad::relu(ad::conv2d(depth, p.get("encoder.conv1.weight"),
                                 p.get("encoder.conv1.bias"), kStride, kPadding));
  h = ad::relu(ad::conv2d(h, p.get("encoder.conv2.weight"),
                          p.get("encoder.conv2.bias"), kStride, kPadding));
  h = ad::reshape(h, {n, h.size() / n});
  return ad::linear(h, p.get("encoder.fc.weight"), p.get("encoder.fc.bias"));
}

Tensor decoder_forward(const NetworkParameters& p, const Tensor& latent) {
  const NetworkConfig cfg = p.config();
  const std::size_t n = latent.dim(0);
  const std::size_t mid_h = halve(cfg.depth_height);
  const std::size_t mid_w = halve(cfg.depth_width);
  Tensor h = ad::relu(
      ad::linear(latent, p.get("decoder.fc.weight"), p.get("decoder.fc.bias")));
  h = ad::reshape(h, {n, cfg.conv2_channels, cfg.encoded_height(),
                      cfg.encoded_width()});
  h = ad::relu(ad::conv_transpose2d(
      h, p.get("decoder.deconv1.weight"), p.get("decoder.deconv1.bias"),
      kStride, kPadding, output_padding_for(mid_h), output_padding_for(mid_w)));
  h = ad::conv_transpose2d(h, p.get("decoder.deconv2.weight"),
                           p.get("decoder.deconv2.bias"), kStride, kPadding,
                           output_padding_for(cfg.depth_height),
                           output_padding_for(cfg.depth_width));
  return ad::sigmoid(h);
}

Tensor policy_logits(const NetworkParameters& p, const Tensor& states) {
  if (states.rank() != 2 || states.dim(1) != kStateDim) {
    throw ShapeError("policy: expected states [n, 256]");
  }
  Tensor h = ad::tanh(
      ad::linear(states, p.get("policy.fc1.weight"), p.get("policy.fc1.bias")));
  return ad::linear(h, p.get("policy.fc2.weight"), p.get("policy.fc2.bias"));
}

Tensor value_batch(const NetworkParameters& p, const Tensor& states) {
  if (states.rank() != 2 || states.dim(1) != kStateDim) {
    throw ShapeError("value: expected states [n, 256]");
  }
  Tensor h = ad::tanh(
      ad::linear(states, p.get("value.fc1.weight"), p.get("value.fc1.bias")));
  Tensor v = ad::linear(h, p.get("value.fc2.weight"), p.get("value.fc2.bias"));
  return ad::reshape(v, {states.dim(0)});
}

std::size_t ActionDistribution::argmax() const {
  return static_cast<std::size_t>(
      std::max_element(probs.begin(), probs.end()) - probs.begin());
}

double ActionDistribution::entropy() const {
  double h = 0.0;
  for (std::size_t a = 0; a < kActionCount; ++a) h -= probs[a] * log_probs[a];
  return h;
}

ActionDistribution policy_forward(const NetworkParameters& p,
                                  std::span<const double> state) {
  if (state.size() != kStateDim) throw ShapeError("policy: state must be 256-d");
  require_finite(state, "policy");
  ad::NoGradGuard no_grad;
  const Tensor s = Tensor::from({1, kStateDim}, {state.begin(), state.end()});
  const Tensor logp = ad::log_softmax(policy_logits(p, s));
  ActionDistribution dist;
  for (std::size_t a = 0; a < kActionCount; ++a) {
    dist.log_probs[a] = logp.data()[a];
    dist.probs[a] = std::exp(dist.log_probs[a]);
  }
  return dist;
}

double value_forward(const NetworkParameters& p,
                     std::span<const double> state) {
  if (state.size() != kStateDim) throw ShapeError("value: state must be 256-d");
  require_finite(state, "value");
  ad::NoGradGuard no_grad;
  const Tensor s = Tensor::from({1, kStateDim}, {state.begin(), state.end()});
  return value_batch(p, s).item();
}

std::vector<double> encode_depth(const NetworkParameters& p,
                                 std::span<const double> normalized_depth) {
  const NetworkConfig cfg = p.config();
  if (normalized_depth.size() != cfg.depth_height * cfg.depth_width) {
    throw ShapeError("encoder: depth map is " +
                     std::to_string(normalized_depth.size()) +
                     " cells, expected " +
                     std::to_string(cfg.depth_height * cfg.depth_width));
  }
  ad::NoGradGuard no_grad;
  const Tensor d = Tensor::from({1, 1, cfg.depth_height, cfg.depth_width},
                                {normalized_depth.begin(), normalized_depth.end()});
  const Tensor f = encoder_forward(p, d);
  return {f.data().begin(), f.data().end()};
}

}  // namespace ippo
