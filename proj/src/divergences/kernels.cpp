#include "densiwae/divergences/kernels.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "densiwae/error.hpp"
#include "densiwae/random.hpp"

namespace densiwae {

namespace {

constexpr double kGroupTol = 1e-10;

double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Tensor identity(std::size_t k) {
  Tensor t = Tensor::matrix(k, k);
  for (std::size_t i = 0; i < k; ++i) t(i, i) = 1.0;
  return t;
}

std::vector<double> default_reference(std::size_t k) {
  std::vector<double> e(k);
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += (e[i] = std::pow(0.5, static_cast<double>(i))) * e[i];
  for (auto& v : e) v /= std::sqrt(s);
  return e;
}

}  // namespace

FiniteGroup::FiniteGroup(std::string name, std::vector<Tensor> elements, std::vector<double> reference_direction)
    : name_(std::move(name)), elements_(std::move(elements)), reference_(std::move(reference_direction)) {
  if (elements_.empty()) throw ConfigError("group '" + name_ + "' has no elements");
  dim_ = elements_[0].rows();
  const Tensor id = identity(dim_);
  bool has_identity = false;
  for (const auto& g : elements_) {
    if (g.rows() != dim_ || g.cols() != dim_) throw ShapeError("group '" + name_ + "' has non-square or mixed-size elements");
    if (max_abs_diff(matmul_at(g, g), id) >= kGroupTol) throw ConfigError("group '" + name_ + "' has a non-orthogonal element");
    identity_.push_back(max_abs_diff(g, id) < kGroupTol);
    has_identity = has_identity || identity_.back();
  }
  if (!has_identity) throw ConfigError("group '" + name_ + "' lacks the identity");
  for (const auto& a : elements_) {
    for (const auto& b : elements_) {
      const Tensor ab = matmul(a, b);
      bool found = false;
      for (const auto& c : elements_) found = found || max_abs_diff(ab, c) < kGroupTol;
      if (!found) throw ConfigError("group '" + name_ + "' is not closed under products");
    }
  }
  if (reference_.empty()) reference_ = default_reference(dim_);
  if (reference_.size() != dim_) throw ShapeError("group reference direction has wrong length");
}

FiniteGroup FiniteGroup::trivial(std::size_t k) { return FiniteGroup("trivial", {identity(k)}); }

FiniteGroup FiniteGroup::sign_flip(std::size_t k) {
  Tensor neg = identity(k);
  neg *= -1.0;
  return FiniteGroup("sign_flip", {identity(k), neg});
}

FiniteGroup FiniteGroup::cyclic(std::size_t m) {
  if (m < 1) throw ConfigError("cyclic group order must be >= 1");
  std::vector<Tensor> el;
  for (std::size_t j = 0; j < m; ++j) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(m);
    // Snap to exact values at multiples of pi/2 so C4 has integer entries.
    auto snap = [](double v) { return std::abs(v) < 1e-15 ? 0.0 : (std::abs(std::abs(v) - 1.0) < 1e-15 ? std::round(v) : v); };
    const double c = snap(std::cos(t)), s = snap(std::sin(t));
    el.push_back(Tensor::from_rows({{c, -s}, {s, c}}));
  }
  const double half = std::numbers::pi / static_cast<double>(m);
  return FiniteGroup("C" + std::to_string(m), std::move(el), {std::cos(half), std::sin(half)});
}

std::vector<double> FiniteGroup::act(std::size_t i, std::span<const double> z) const {
  if (z.size() != dim_) throw ShapeError("group action: vector has dimension " + std::to_string(z.size()) +
                                         ", group acts on " + std::to_string(dim_));
  const Tensor& g = elements_[i];
  std::vector<double> out(dim_, 0.0);
  for (std::size_t r = 0; r < dim_; ++r)
    for (std::size_t c = 0; c < dim_; ++c) out[r] += g(r, c) * z[c];
  return out;
}

std::vector<double> FiniteGroup::canonical(std::span<const double> z) const {
  std::vector<double> best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < order(); ++i) {
    auto img = act(i, z);
    double score = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) score += img[j] * reference_[j];
    if (score > best_score) {
      best_score = score;
      best = std::move(img);
    }
  }
  return best;
}

KernelSpec KernelSpec::gaussian(double sigma) {
  if (!(sigma > 0)) throw ConfigError("gaussian kernel bandwidth must be positive");
  KernelSpec k;
  k.kind = KernelKind::gaussian;
  k.sigma = sigma;
  return k;
}

KernelSpec KernelSpec::energy(double alpha) {
  if (!(alpha > 0 && alpha < 1)) throw ConfigError("energy kernel exponent must lie in (0, 1)");
  KernelSpec k;
  k.kind = KernelKind::energy;
  k.alpha = alpha;
  return k;
}

KernelSpec KernelSpec::anisotropic_gaussian(std::vector<double> bandwidths) {
  if (bandwidths.empty()) throw ConfigError("anisotropic kernel needs bandwidths");
  for (double h : bandwidths)
    if (!(h > 0)) throw ConfigError("anisotropic kernel bandwidths must be positive");
  KernelSpec k;
  k.kind = KernelKind::anisotropic_gaussian;
  k.bandwidths = std::move(bandwidths);
  return k;
}

KernelSpec KernelSpec::group_invariant(const KernelSpec& base, const FiniteGroup& group, std::uint64_t probe_seed) {
  if (!base.bounded()) throw ConfigError("group-invariant kernel needs a bounded base kernel");
  Rng rng = make_rng(derive_seed(probe_seed, "kernel-invariance"));
  std::normal_distribution<double> g(0.0, 1.0);
  const std::size_t k = group.dim();
  std::vector<double> u(k), v(k);
  for (int probe = 0; probe < 64; ++probe) {
    for (auto& x : u) x = 2.0 * g(rng);
    for (auto& x : v) x = 2.0 * g(rng);
    const double ref = kernel_eval(base, u, v);
    for (std::size_t i = 0; i < group.order(); ++i) {
      if (std::abs(kernel_eval(base, group.act(i, u), group.act(i, v)) - ref) >= kGroupTol)
        throw ConfigError("base kernel " + base.describe() + " is not invariant under group " + group.name());
    }
  }
  KernelSpec out;
  out.kind = KernelKind::group_invariant;
  out.base = std::make_shared<KernelSpec>(base);
  out.group = std::make_shared<FiniteGroup>(group);
  return out;
}

double KernelSpec::bound() const {
  switch (kind) {
    case KernelKind::gaussian:
    case KernelKind::anisotropic_gaussian: return 1.0;
    case KernelKind::energy: return std::numeric_limits<double>::infinity();
    case KernelKind::group_invariant: return base->bound();
  }
  return std::numeric_limits<double>::infinity();
}

bool KernelSpec::bounded() const { return std::isfinite(bound()); }

bool KernelSpec::radial() const {
  switch (kind) {
    case KernelKind::gaussian:
    case KernelKind::energy: return true;
    case KernelKind::anisotropic_gaussian: {
      for (double h : bandwidths)
        if (h != bandwidths.front()) return false;
      return true;
    }
    case KernelKind::group_invariant: return false;
  }
  return false;
}

std::string KernelSpec::describe() const {
  std::ostringstream s;
  switch (kind) {
    case KernelKind::gaussian: s << "gaussian(sigma=" << sigma << ")"; break;
    case KernelKind::energy: s << "energy(alpha=" << alpha << ")"; break;
    case KernelKind::anisotropic_gaussian: {
      s << "anisotropic_gaussian(";
      for (std::size_t i = 0; i < bandwidths.size(); ++i) s << (i ? "," : "") << bandwidths[i];
      s << ")";
      break;
    }
    case KernelKind::group_invariant: s << "group_invariant(" << base->describe() << ", " << group->name() << ")"; break;
  }
  return s.str();
}

double kernel_eval(const KernelSpec& spec, std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw ShapeError("kernel_eval: dimension mismatch");
  switch (spec.kind) {
    case KernelKind::gaussian:
      return std::exp(-squared_distance(u, v) / (2.0 * spec.sigma * spec.sigma));
    case KernelKind::energy: {
      double nu = 0.0, nv = 0.0;
      for (double x : u) nu += x * x;
      for (double x : v) nv += x * x;
      const double a = spec.alpha;
      return std::pow(nu, a) + std::pow(nv, a) - std::pow(squared_distance(u, v), a);
    }
    case KernelKind::anisotropic_gaussian: {
      if (spec.bandwidths.size() != u.size()) throw ShapeError("anisotropic kernel: bandwidth count differs from dimension");
      double s = 0.0;
      for (std::size_t j = 0; j < u.size(); ++j) {
        const double t = (u[j] - v[j]) / spec.bandwidths[j];
        s += t * t;
      }
      return std::exp(-0.5 * s);
    }
    case KernelKind::group_invariant: {
      double s = 0.0;
      for (std::size_t i = 0; i < spec.group->order(); ++i) s += kernel_eval(*spec.base, u, spec.group->act(i, v));
      return s / static_cast<double>(spec.group->order());
    }
  }
  return 0.0;
}

double kernel_sum(const KernelSpec& spec, const Tensor& x, const Tensor& y) {
  if (x.cols() != y.cols()) throw ShapeError("kernel_sum: dimension mismatch");
  const std::size_t d = x.cols();
  double total = 0.0;
  if (spec.kind == KernelKind::gaussian) {
    const double c = -1.0 / (2.0 * spec.sigma * spec.sigma);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const double* xi = x.row(i).data();
      double acc = 0.0;
      for (std::size_t j = 0; j < y.rows(); ++j) {
        const double* yj = y.row(j).data();
        double s = 0.0;
        for (std::size_t t = 0; t < d; ++t) {
          const double diff = xi[t] - yj[t];
          s += diff * diff;
        }
        acc += std::exp(c * s);
      }
      total += acc;
    }
    return total;
  }
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < y.rows(); ++j) total += kernel_eval(spec, x.row(i), y.row(j));
  return total;
}

double kernel_diag_sum(const KernelSpec& spec, const Tensor& x) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) total += kernel_eval(spec, x.row(i), x.row(i));
  return total;
}

}  // namespace densiwae
