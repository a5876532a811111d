#include "densiwae/networks/architectures.hpp"

namespace densiwae {

namespace {

MlpSpec make(std::vector<std::size_t> widths, HiddenActivation act, OutputTransform out, double lo, double hi) {
  MlpSpec s = MlpSpec::uniform(std::move(widths), act, out);
  s.lo = lo;
  s.hi = hi;
  s.validate();
  return s;
}

}  // namespace

Mlp build_encoder(const MlpSpec& spec, std::uint64_t seed) { return build_mlp(spec, seed); }

MlpSpec five_gaussian_encoder_spec(std::size_t latent_dim, HiddenActivation act, OutputTransform out,
                                   double lo, double hi) {
  return make({3, 32, 32, 32, latent_dim}, act, out, lo, hi);
}

MlpSpec five_gaussian_decoder_spec(std::size_t latent_dim, HiddenActivation act) {
  return make({latent_dim, 32, 32, 32, 3}, act, OutputTransform::identity, 0.0, 1.0);
}

MlpSpec mnist_encoder_spec(std::size_t latent_dim, HiddenActivation act, OutputTransform out, double lo,
                           double hi) {
  return make({784, 512, 256, 128, 64, latent_dim}, act, out, lo, hi);
}

MlpSpec mnist_decoder_spec(std::size_t latent_dim, HiddenActivation act) {
  return make({latent_dim, 64, 128, 256, 512, 784}, act, OutputTransform::affine_rescale, 0.0, 1.0);
}

MlpSpec discriminator_spec(std::size_t latent_dim) {
  return make({latent_dim, 64, 64, 64, 1}, {Activation::relu, 2}, OutputTransform::identity, 0.0, 1.0);
}

}  // namespace densiwae
