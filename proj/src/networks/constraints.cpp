#include "densiwae/networks/constraints.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "densiwae/error.hpp"

namespace densiwae {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double row_measure(std::span<const double> row, NormKind kind) {
  double s = 0.0;
  if (kind == NormKind::inf) {
    for (double v : row) s += std::abs(v);
    return s;
  }
  for (double v : row) s += v * v;
  return std::sqrt(s);
}

}  // namespace

double operator_norm(const Tensor& m, NormKind kind) {
  if (m.empty()) return 0.0;
  if (kind == NormKind::spectral) {
    Eigen::Map<const RowMat> a(m.values().data(), static_cast<Eigen::Index>(m.rows()),
                               static_cast<Eigen::Index>(m.cols()));
    Eigen::JacobiSVD<RowMat> svd(a);
    return svd.singularValues()(0);
  }
  double best = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r) best = std::max(best, row_measure(m.row(r), kind));
  return best;
}

Tensor project_matrix(const Tensor& m, NormKind kind, double bound) {
  if (!(bound > 0)) throw ConfigError("norm bound must be positive");
  Tensor out = m;
  if (kind == NormKind::spectral) {
    const double s = operator_norm(m, kind);
    if (s > bound) out *= bound / s;
    return out;
  }
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    const double s = row_measure(row, kind);
    if (s > bound)
      for (double& v : row) v *= bound / s;
  }
  return out;
}

Mlp constrain_norms(const Mlp& mlp, NormKind kind, double bound) {
  Mlp out = mlp;
  for (auto& w : out.weights) w = project_matrix(w, kind, bound);
  return out;
}

Mlp constrain_lipschitz(const Mlp& mlp, double bound) {
  Mlp out = mlp;
  for (std::size_t i = 0; i < out.weights.size(); ++i)
    out.weights[i] = project_matrix(out.weights[i], i == 0 ? NormKind::two_inf : NormKind::inf, bound);
  return out;
}

}  // namespace densiwae
