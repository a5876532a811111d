#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "densiwae/autodiff/tensor.hpp"

namespace densiwae {

struct TestResult {
  std::string test;
  double statistic = 0.0;
  double p_value = 1.0;
  std::string method;
  std::size_t replications = 0;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::size_t m = 0;
  double clipped_mass = 0.0;  // eigenvalue method: |sum of negative eigenvalues|
};

/// Fasano-Franceschini statistic (D_X + D_Y) / 2. Origins are taken from
/// both samples; a coordinate equal to the origin's counts as the lower side.
double ff_statistic(const Tensor& x, const Tensor& y);

/// Permutation p-value (1 + #{D* >= D}) / (n_perm + 1). d must be 2 or 3.
TestResult ff_test(const Tensor& x, const Tensor& y, std::size_t n_perm, std::uint64_t seed);

enum class CramerMethod { monte_carlo, eigenvalue };

/// T = (nm/(n+m)) (2 mean phi_xy - mean phi_xx - mean phi_yy), phi = |.|/2.
double cramer_statistic(const Tensor& x, const Tensor& y);

/// monte_carlo: permutation p-value with n_rep relabelings.
/// eigenvalue: tail of sum lambda_i Z_i^2 with n_rep simulated draws, lambda
/// the nonnegative eigenvalues of the doubly centred -phi matrix over N.
TestResult cramer_test(const Tensor& x, const Tensor& y, CramerMethod method, std::size_t n_rep, std::uint64_t seed);

std::string to_string(CramerMethod m);

void write_test_header(std::ostream& out);
void write_test_row(std::ostream& out, const TestResult& r);

}  // namespace densiwae
