#pragma once

#include <cstdint>
#include <string>

#include "densiwae/networks/mlp.hpp"

namespace densiwae {

/// Builds an encoder from a validated spec. Same as build_mlp; kept as the
/// entry point named after its role.
Mlp build_encoder(const MlpSpec& spec, std::uint64_t seed);

/// Five-Gaussian encoder [3, 32, 32, 32, k]: four affine layers.
MlpSpec five_gaussian_encoder_spec(std::size_t latent_dim, HiddenActivation act, OutputTransform out,
                                   double lo = 0.0, double hi = 1.0);
/// Mirror image [k, 32, 32, 32, 3] with identity output.
MlpSpec five_gaussian_decoder_spec(std::size_t latent_dim, HiddenActivation act);

/// MNIST encoder [784, 512, 256, 128, 64, k].
MlpSpec mnist_encoder_spec(std::size_t latent_dim, HiddenActivation act, OutputTransform out,
                           double lo = 0.0, double hi = 1.0);
/// [k, 64, 128, 256, 512, 784] with a sigmoid output into [0, 1].
MlpSpec mnist_decoder_spec(std::size_t latent_dim, HiddenActivation act);

/// Latent critic for the adversarial variant: [k, 64, 64, 64, 1], ReLU, logit output.
MlpSpec discriminator_spec(std::size_t latent_dim);

}  // namespace densiwae
