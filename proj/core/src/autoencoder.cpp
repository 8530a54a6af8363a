#include "ippo/autoencoder.hpp"

#include <cmath>

#include "ippo/errors.hpp"

namespace ippo {

namespace {

ad::Tensor stack_maps(const NetworkParameters& params,
                      std::span<const DepthMap> batch) {
  if (batch.empty()) throw ValidationError("empty depth-map batch");
  const NetworkConfig cfg = params.config();
  const std::size_t h = cfg.depth_height;
  const std::size_t w = cfg.depth_width;
  std::vector<double> values;
  values.reserve(batch.size() * h * w);
  for (const DepthMap& map : batch) {
    if (static_cast<std::size_t>(map.height()) != h ||
        static_cast<std::size_t>(map.width()) != w) {
      throw ShapeError("depth map does not match the encoder input size");
    }
    const auto norm = map.normalized();
    values.insert(values.end(), norm.begin(), norm.end());
  }
  return ad::Tensor::from({batch.size(), 1, h, w}, std::move(values));
}

ad::Tensor loss_graph(const NetworkParameters& params, const ad::Tensor& x) {
  const ad::Tensor recon = decoder_forward(params, encoder_forward(params, x));
  return ad::mean(ad::square(ad::sub(recon, x)));
}

}  // namespace

std::vector<ad::Tensor> autoencoder_parameters(const NetworkParameters& params) {
  std::vector<ad::Tensor> out = params.group("encoder.");
  for (auto& t : params.group("decoder.")) out.push_back(t);
  return out;
}

double reconstruction_loss(const NetworkParameters& params,
                           std::span<const DepthMap> batch) {
  ad::NoGradGuard guard;
  return loss_graph(params, stack_maps(params, batch)).item();
}

double autoencoder_train_step(const NetworkParameters& params, Adam& optimizer,
                              std::span<const DepthMap> batch) {
  const ad::Tensor x = stack_maps(params, batch);
  optimizer.zero_grad();
  const ad::Tensor loss = loss_graph(params, x);
  const double value = loss.item();
  backward_and_step(loss, optimizer);
  return value;
}

void standardize_latent(NetworkParameters& params,
                        std::span<const DepthMap> maps) {
  const ad::Tensor x = stack_maps(params, maps);
  std::vector<double> latent;
  {
    ad::NoGradGuard guard;
    const ad::Tensor z = encoder_forward(params, x);
    latent.assign(z.data().begin(), z.data().end());
  }
  const std::size_t n = maps.size();
  const std::size_t k = latent.size() / n;
  std::vector<double> mean(k, 0.0);
  std::vector<double> scale(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) mean[j] += latent[i * k + j];
  }
  for (double& m : mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double d = latent[i * k + j] - mean[j];
      scale[j] += d * d;
    }
  }
  for (double& s : scale) {
    s = std::sqrt(s / static_cast<double>(n));
    if (s < 1e-6) s = 1.0;
  }

  // z' = (W^T h + b - mean) / scale
  ad::Tensor enc_wt = params.get("encoder.fc.weight");
  ad::Tensor enc_bt = params.get("encoder.fc.bias");
  auto enc_w = enc_wt.data_mut();
  auto enc_b = enc_bt.data_mut();
  const std::size_t in = enc_w.size() / k;
  for (std::size_t r = 0; r < in; ++r) {
    for (std::size_t j = 0; j < k; ++j) enc_w[r * k + j] /= scale[j];
  }
  for (std::size_t j = 0; j < k; ++j) enc_b[j] = (enc_b[j] - mean[j]) / scale[j];

  // Decoder sees z = z' * scale + mean.
  ad::Tensor dec_wt = params.get("decoder.fc.weight");
  ad::Tensor dec_bt = params.get("decoder.fc.bias");
  auto dec_w = dec_wt.data_mut();
  auto dec_b = dec_bt.data_mut();
  const std::size_t out = dec_w.size() / k;
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t c = 0; c < out; ++c) {
      dec_b[c] += mean[j] * dec_w[j * out + c];
      dec_w[j * out + c] *= scale[j];
    }
  }
}

}  // namespace ippo
