#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "densiwae/autodiff/tensor.hpp"

namespace densiwae {

enum class GroundMetric { l1, l2 };

/// Pairwise ground costs, n x m.
Tensor cost_matrix(const Tensor& x, const Tensor& y, GroundMetric metric);

struct Assignment {
  std::vector<std::size_t> col_of_row;
  double total_cost = 0.0;
};

/// Minimum-cost perfect matching on a square cost matrix (shortest
/// augmenting path with dual potentials, O(n^3)).
Assignment solve_assignment(const Tensor& cost);

/// Balanced transportation problem with integer supplies/demands, solved by
/// the transportation simplex from a north-west-corner basis. Returns the
/// optimal total cost sum x_ij c_ij.
double solve_transport(const Tensor& cost, const std::vector<std::int64_t>& supply,
                       const std::vector<std::int64_t>& demand);

/// Exact 1-Wasserstein distance between uniform empirical measures.
double w1_exact(const Tensor& x, const Tensor& y, GroundMetric metric = GroundMetric::l2);

/// Exact W1 between 1D samples via the integral of |F - G|.
double w1_1d(std::span<const double> x, std::span<const double> y);

struct CappedW1 {
  double value = 0.0;
  bool subsampled = false;
  std::size_t used_x = 0;
  std::size_t used_y = 0;
};

/// w1_exact after uniformly subsampling each set to at most `cap` rows.
CappedW1 w1_exact_capped(const Tensor& x, const Tensor& y, GroundMetric metric = GroundMetric::l2,
                         std::size_t cap = 3000, std::uint64_t seed = 0);

struct SinkhornResult {
  double cost = 0.0;  // <P, C> for the entropic plan P
  bool converged = false;
  double residual = 0.0;  // l1 marginal violation
  std::size_t iterations = 0;
};

SinkhornResult w1_sinkhorn(const Tensor& x, const Tensor& y, double reg, std::size_t max_iter = 100000,
                           double tol = 1e-9, GroundMetric metric = GroundMetric::l2);

}  // namespace densiwae
