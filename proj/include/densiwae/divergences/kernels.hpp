#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "densiwae/autodiff/tensor.hpp"

namespace densiwae {

/// Finite group of orthogonal k x k matrices acting on row vectors z by
/// z -> sigma z.
class FiniteGroup {
 public:
  /// Validates identity membership, orthogonality and closure at 1e-10.
  FiniteGroup(std::string name, std::vector<Tensor> elements, std::vector<double> reference_direction = {});

  static FiniteGroup trivial(std::size_t k);
  /// {I, -I}.
  static FiniteGroup sign_flip(std::size_t k);
  /// Planar rotations by multiples of 2 pi / m.
  static FiniteGroup cyclic(std::size_t m);

  const std::string& name() const { return name_; }
  std::size_t order() const { return elements_.size(); }
  std::size_t dim() const { return dim_; }
  const std::vector<Tensor>& elements() const { return elements_; }
  const Tensor& element(std::size_t i) const { return elements_[i]; }
  bool is_identity(std::size_t i) const { return identity_[i]; }
  /// Unit vector e used to pick orbit representatives argmax <sigma z, e>.
  const std::vector<double>& reference_direction() const { return reference_; }

  std::vector<double> act(std::size_t i, std::span<const double> z) const;
  /// Orbit representative of z: the image maximising <sigma z, e>.
  std::vector<double> canonical(std::span<const double> z) const;

 private:
  std::string name_;
  std::size_t dim_ = 0;
  std::vector<Tensor> elements_;
  std::vector<bool> identity_;
  std::vector<double> reference_;
};

enum class KernelKind { gaussian, energy, anisotropic_gaussian, group_invariant };

/// Positive-definite kernel description.
///  gaussian:             exp(-|u-v|^2 / (2 sigma^2))
///  energy:               |u|^{2a} + |v|^{2a} - |u-v|^{2a}
///  anisotropic_gaussian: exp(-sum_j (u_j-v_j)^2 / (2 h_j^2))
///  group_invariant:      (1/|G|) sum_g base(u, g v); base must satisfy
///                        base(g u, g v) = base(u, v)
struct KernelSpec {
  KernelKind kind = KernelKind::gaussian;
  double sigma = 1.0;
  double alpha = 0.5;
  std::vector<double> bandwidths;
  std::shared_ptr<const KernelSpec> base;
  std::shared_ptr<const FiniteGroup> group;

  static KernelSpec gaussian(double sigma);
  static KernelSpec energy(double alpha);
  static KernelSpec anisotropic_gaussian(std::vector<double> bandwidths);
  /// Throws ConfigError if the base is unbounded or fails the invariance
  /// probe on random points.
  static KernelSpec group_invariant(const KernelSpec& base, const FiniteGroup& group, std::uint64_t probe_seed = 0);

  /// sup_z k(z, z); +infinity for the energy kernel.
  double bound() const;
  bool bounded() const;
  /// Invariant under simultaneous orthogonal maps of both arguments.
  bool radial() const;
  std::string describe() const;
};

double kernel_eval(const KernelSpec& spec, std::span<const double> u, std::span<const double> v);

/// Sum over all (i, j) of k(x_i, y_j).
double kernel_sum(const KernelSpec& spec, const Tensor& x, const Tensor& y);
/// Sum of the diagonal k(x_i, x_i).
double kernel_diag_sum(const KernelSpec& spec, const Tensor& x);

}  // namespace densiwae
