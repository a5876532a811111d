#pragma once

#include <cstdint>
#include <vector>

#include "densiwae/autodiff/tensor.hpp"
#include "densiwae/divergences/kernels.hpp"

namespace densiwae {

/// |K(P_n) - K(Q_m)| in the RKHS, i.e. the square root of the V-statistic.
double mmd_biased(const Tensor& x, const Tensor& y, const KernelSpec& spec);

/// U-statistic of MMD^2; can be negative. Needs at least two rows per set.
double mmd_sq_unbiased(const Tensor& x, const Tensor& y, const KernelSpec& spec);

/// Fixed comparison sample with its self-similarity term precomputed, for
/// many biased-MMD evaluations against the same large reference.
class MmdReference {
 public:
  MmdReference(Tensor reference, KernelSpec spec);
  double mmd_biased(const Tensor& x) const;
  const Tensor& reference() const { return reference_; }

 private:
  Tensor reference_;
  KernelSpec spec_;
  double yy_mean_ = 0.0;
};

/// Expands each row z_i into (g_1 z_i, ..., g_|G| z_i), sample-major.
Tensor symmetrize(const Tensor& samples, const FiniteGroup& group);

/// max over probes z and non-identity g of k(g z, z) / C_k, clamped to [0, 1].
/// Returns 0 for the trivial group.
double estimate_varsigma(const KernelSpec& spec, const FiniteGroup& group, const Tensor& probes);

/// Probes are standard Gaussian draws mapped to their orbit representatives.
double estimate_varsigma(const KernelSpec& spec, const FiniteGroup& group, std::size_t n_probe, std::uint64_t seed);

}  // namespace densiwae
