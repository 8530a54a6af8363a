#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ippo/autodiff.hpp"

namespace ippo {

inline constexpr std::size_t kActionCount = 8;
inline constexpr std::size_t kLatentDim = 254;
inline constexpr std::size_t kStateDim = kLatentDim + 2;

struct NetworkConfig {
  std::size_t depth_height = 16;
  std::size_t depth_width = 32;
  std::size_t conv1_channels = 8;
  std::size_t conv2_channels = 16;
  std::size_t latent_dim = kLatentDim;
  std::size_t head_hidden = 128;

  /// Spatial extent after the two stride-2 convolutions.
  std::size_t encoded_height() const;
  std::size_t encoded_width() const;
};

struct NamedTensor {
  std::string name;
  ad::Tensor tensor;
};

/// Ordered, named parameter tensors for the encoder, decoder, policy head and
/// value head. Copies share tensors; use clone() for an independent snapshot.
class NetworkParameters {
 public:
  NetworkParameters() = default;

  void add(std::string name, ad::Tensor tensor);
  const ad::Tensor& get(std::string_view name) const;
  bool contains(std::string_view name) const;

  const std::vector<NamedTensor>& entries() const { return entries_; }
  /// Tensors whose names start with `prefix` ("encoder.", "policy.", ...).
  std::vector<ad::Tensor> group(std::string_view prefix) const;
  std::vector<ad::Tensor> all() const;
  std::size_t scalar_count() const;

  NetworkParameters clone() const;
  void zero_grad() const;
  /// Copies values from `other` (same names and shapes) in place.
  void assign(const NetworkParameters& other);

  /// Encoder input geometry recovered from tensor shapes.
  NetworkConfig config() const;

 private:
  std::vector<NamedTensor> entries_;
};

/// Uniform fan-in initialisation, U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
NetworkParameters init_parameters(const NetworkConfig& config,
                                  std::uint64_t seed);

/// depth [n, 1, H, W] normalised to [0, 1] -> latent [n, 254].
ad::Tensor encoder_forward(const NetworkParameters& params,
                           const ad::Tensor& depth);
/// latent [n, 254] -> reconstruction [n, 1, H, W] in (0, 1).
ad::Tensor decoder_forward(const NetworkParameters& params,
                           const ad::Tensor& latent);
/// states [n, 256] -> logits [n, 8].
ad::Tensor policy_logits(const NetworkParameters& params,
                         const ad::Tensor& states);
/// states [n, 256] -> values [n].
ad::Tensor value_batch(const NetworkParameters& params,
                       const ad::Tensor& states);

struct ActionDistribution {
  std::array<double, kActionCount> probs{};
  std::array<double, kActionCount> log_probs{};

  std::size_t argmax() const;
  double entropy() const;
};

/// Single-state policy evaluation. Throws ValidationError on non-finite input.
ActionDistribution policy_forward(const NetworkParameters& params,
                                  std::span<const double> state);
double value_forward(const NetworkParameters& params,
                     std::span<const double> state);
/// One normalised depth image (H * W values) -> 254 latent features.
std::vector<double> encode_depth(const NetworkParameters& params,
                                 std::span<const double> normalized_depth);

}  // namespace ippo
