#pragma once

#include <span>

#include "ippo/networks.hpp"
#include "ippo/optimizer.hpp"
#include "ippo/world.hpp"

namespace ippo {

/// Encoder and decoder tensors, the set trained by reconstruction.
std::vector<ad::Tensor> autoencoder_parameters(const NetworkParameters& params);

/// Mean squared reconstruction error of normalised depth maps; no update.
double reconstruction_loss(const NetworkParameters& params,
                           std::span<const DepthMap> batch);

/// One optimiser step on the reconstruction error. Returns the loss before
/// the step. Throws ValidationError on an empty batch.
double autoencoder_train_step(const NetworkParameters& params, Adam& optimizer,
                              std::span<const DepthMap> batch);

/// Rescales the encoder's output layer so the latent code has zero mean and
/// unit variance per feature over `maps`, and compensates in the decoder so
/// reconstructions are unchanged. Features with (near) zero spread are only
/// centred.
void standardize_latent(NetworkParameters& params,
                        std::span<const DepthMap> maps);

}  // namespace ippo
