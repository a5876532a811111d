#pragma once

#include <cstdint>
#include <functional>
#include <utility>

#include "densiwae/autodiff/tensor.hpp"
#include "densiwae/networks/mlp.hpp"
#include "densiwae/random.hpp"

namespace densiwae {

/// x -> matrix * x for each row x; matrix is out x in.
struct LinearMap {
  Tensor matrix;
  std::uint64_t seed = 0;

  std::size_t in_dim() const { return matrix.cols(); }
  std::size_t out_dim() const { return matrix.rows(); }
};

Tensor apply(const LinearMap& map, const Tensor& points);

/// Gaussian random projection R^d -> R^k with entries N(0, 1/k).
LinearMap jl_projection(std::size_t d, std::size_t k, std::uint64_t seed);

/// Target dimension ceil(log(n) / eps^2).
std::size_t jl_dimension(std::size_t n, double eps);

struct Distortion {
  double min_ratio = 1.0;
  double max_ratio = 1.0;
  std::size_t pairs = 0;  // pairs with distinct points
};

/// Extreme values of |E(x) - E(y)| / |x - y| over all pairs of distinct rows.
Distortion distortion(const LinearMap& map, const Tensor& points);

using LatentSampler = std::function<Tensor(std::size_t count, Rng& rng)>;

/// Standard Gaussian rows in R^k.
LatentSampler standard_gaussian_sampler(std::size_t k);

/// Decoder z -> phi(D0 z) whose push-forward of the reference latent sample is
/// the uniform law on the atoms.
///
/// D0 is the leading principal direction of the reference sample. phi is a
/// continuous piecewise-linear path through the atoms (greedy nearest
/// neighbour order) with one ramp per consecutive pair, placed inside the
/// gap between two quantile blocks of projected reference values so that no
/// reference point lands on a ramp.
struct MemorizingDecoder {
  LinearMap d0;
  Tensor ordered_atoms;
  std::vector<double> ramp_lo;
  std::vector<double> ramp_hi;
  Tensor reference;
  std::size_t per_atom = 1;
  std::size_t attempts = 1;
  // Realisation as a ReLU network with widths [k, 2(n-1), d] (or [k, d] when n = 1).
  Mlp network;
};

MemorizingDecoder build_memorizing_decoder(const Tensor& atoms, std::size_t k, double eps,
                                           std::uint64_t seed, const LatentSampler& sampler = {});

Tensor decode(const MemorizingDecoder& dec, const Tensor& latents);

/// Memorisation capacity of a ReLU net of width W and depth L on inputs of
/// dimension d: (W-d-1)/2 * floor((W-d-1)/(6d)) * floor(L/2) + 2 (0 when W <= d+1).
double relu_capacity_bound(std::size_t width, std::size_t depth, std::size_t input_dim);

}  // namespace densiwae
