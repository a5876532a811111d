#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "densiwae/autodiff/tensor.hpp"
#include "densiwae/random.hpp"

namespace densiwae {

struct DensityCandidate {
  std::function<double(std::span<const double>)> density;
  std::function<Tensor(std::size_t count, Rng& rng)> sampler;
};

struct ScheffeResult {
  std::size_t winner = 0;
  std::vector<double> max_discrepancy;  // per candidate
};

/// Minimum-distance selection over the Scheffe sets A_ij = {p_i >= p_j}:
/// candidate k scores max_ij |P_k(A_ij) - P_n(A_ij)| with P_k(A_ij) estimated
/// from `mc_draws` draws of candidate k. Lowest index wins ties.
ScheffeResult scheffe_select(const std::vector<DensityCandidate>& candidates, const Tensor& samples,
                             std::uint64_t seed, std::size_t mc_draws = 10000);

}  // namespace densiwae
