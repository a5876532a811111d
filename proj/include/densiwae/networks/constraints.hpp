#pragma once

#include "densiwae/autodiff/tensor.hpp"
#include "densiwae/networks/mlp.hpp"

namespace densiwae {

/// Operator norms used for Lipschitz projections.
///  spectral: l2 -> l2 (largest singular value)
///  inf:      l_inf -> l_inf (max absolute row sum)
///  two_inf:  l2 -> l_inf (max Euclidean row norm)
enum class NormKind { spectral, inf, two_inf };

double operator_norm(const Tensor& m, NormKind kind);

/// Projects a single matrix so that operator_norm(m, kind) <= bound.
/// spectral rescales the whole matrix; inf and two_inf rescale offending rows
/// only. Feasible inputs are returned unchanged.
Tensor project_matrix(const Tensor& m, NormKind kind, double bound);

/// Applies project_matrix to every weight matrix. Biases are untouched.
Mlp constrain_norms(const Mlp& mlp, NormKind kind, double bound);

/// First layer in the 2 -> inf norm, remaining layers in the inf norm. With
/// GroupSort (or any inf-norm 1-Lipschitz) activations the network is then
/// bound^L-Lipschitz from (R^d, l2) to (R^k, l_inf).
Mlp constrain_lipschitz(const Mlp& mlp, double bound);

}  // namespace densiwae
