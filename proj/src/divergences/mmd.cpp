#include "densiwae/divergences/mmd.hpp"

#include <algorithm>
#include <cmath>

#include "densiwae/error.hpp"
#include "densiwae/random.hpp"

namespace densiwae {

namespace {

void check_pair(const Tensor& x, const Tensor& y) {
  if (x.rows() == 0 || y.rows() == 0) throw ConfigError("MMD needs at least one sample per set");
  if (x.cols() != y.cols())
    throw ShapeError("MMD: dimensions differ (" + std::to_string(x.cols()) + " vs " + std::to_string(y.cols()) + ")");
}

}  // namespace

double mmd_biased(const Tensor& x, const Tensor& y, const KernelSpec& spec) {
  check_pair(x, y);
  const double n = static_cast<double>(x.rows()), m = static_cast<double>(y.rows());
  const double v = kernel_sum(spec, x, x) / (n * n) + kernel_sum(spec, y, y) / (m * m) -
                   2.0 * kernel_sum(spec, x, y) / (n * m);
  return std::sqrt(std::max(0.0, v));
}

double mmd_sq_unbiased(const Tensor& x, const Tensor& y, const KernelSpec& spec) {
  check_pair(x, y);
  if (x.rows() < 2 || y.rows() < 2) throw ConfigError("unbiased MMD needs at least two samples per set");
  const double n = static_cast<double>(x.rows()), m = static_cast<double>(y.rows());
  const double xx = (kernel_sum(spec, x, x) - kernel_diag_sum(spec, x)) / (n * (n - 1));
  const double yy = (kernel_sum(spec, y, y) - kernel_diag_sum(spec, y)) / (m * (m - 1));
  return xx + yy - 2.0 * kernel_sum(spec, x, y) / (n * m);
}

MmdReference::MmdReference(Tensor reference, KernelSpec spec) : reference_(std::move(reference)), spec_(std::move(spec)) {
  if (reference_.rows() == 0) throw ConfigError("MMD reference sample is empty");
  const double m = static_cast<double>(reference_.rows());
  yy_mean_ = kernel_sum(spec_, reference_, reference_) / (m * m);
}

double MmdReference::mmd_biased(const Tensor& x) const {
  check_pair(x, reference_);
  const double n = static_cast<double>(x.rows()), m = static_cast<double>(reference_.rows());
  const double v = kernel_sum(spec_, x, x) / (n * n) + yy_mean_ - 2.0 * kernel_sum(spec_, x, reference_) / (n * m);
  return std::sqrt(std::max(0.0, v));
}

Tensor symmetrize(const Tensor& samples, const FiniteGroup& group) {
  if (samples.cols() != group.dim())
    throw ShapeError("symmetrize: samples have dimension " + std::to_string(samples.cols()) + ", group acts on " +
                     std::to_string(group.dim()));
  const std::size_t g = group.order();
  Tensor out = Tensor::matrix(samples.rows() * g, samples.cols());
  for (std::size_t i = 0; i < samples.rows(); ++i) {
    for (std::size_t e = 0; e < g; ++e) {
      const auto img = group.act(e, samples.row(i));
      std::copy(img.begin(), img.end(), out.row(i * g + e).begin());
    }
  }
  return out;
}

double estimate_varsigma(const KernelSpec& spec, const FiniteGroup& group, const Tensor& probes) {
  if (!spec.bounded()) throw ConfigError("varsigma needs a bounded kernel; " + spec.describe() + " is unbounded");
  if (probes.cols() != group.dim()) throw ShapeError("varsigma: probe dimension differs from group dimension");
  const double c = spec.bound();
  double best = 0.0;
  for (std::size_t p = 0; p < probes.rows(); ++p)
    for (std::size_t e = 0; e < group.order(); ++e)
      if (!group.is_identity(e)) best = std::max(best, kernel_eval(spec, group.act(e, probes.row(p)), probes.row(p)) / c);
  return std::clamp(best, 0.0, 1.0);
}

double estimate_varsigma(const KernelSpec& spec, const FiniteGroup& group, std::size_t n_probe, std::uint64_t seed) {
  if (!spec.bounded()) throw ConfigError("varsigma needs a bounded kernel; " + spec.describe() + " is unbounded");
  Rng rng = make_rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Tensor probes = Tensor::matrix(n_probe, group.dim());
  std::vector<double> z(group.dim());
  for (std::size_t p = 0; p < n_probe; ++p) {
    for (auto& v : z) v = g(rng);
    const auto rep = group.canonical(z);
    std::copy(rep.begin(), rep.end(), probes.row(p).begin());
  }
  return estimate_varsigma(spec, group, probes);
}

}  // namespace densiwae
