#include "densiwae/kde/kde.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>

#include "densiwae/divergences/transport.hpp"
#include "densiwae/error.hpp"

namespace densiwae {

namespace {

const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

double uniform_1d(double u) {
  const double a = std::abs(u);
  if (a < 0.5) return 1.0;
  if (a == 0.5) return 0.5;
  return 0.0;
}

// All multi-indices over `dim` axes with total degree in [1, max_degree].
std::vector<std::vector<std::size_t>> multi_indices(std::size_t dim, std::size_t max_degree) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur(dim, 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t axis, std::size_t used) {
    if (axis == dim) {
      if (used >= 1) out.push_back(cur);
      return;
    }
    for (std::size_t e = 0; used + e <= max_degree; ++e) {
      cur[axis] = e;
      rec(axis + 1, used + e);
    }
    cur[axis] = 0;
  };
  rec(0, 0);
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    std::size_t sa = 0, sb = 0;
    for (auto v : a) sa += v;
    for (auto v : b) sb += v;
    return sa < sb;
  });
  return out;
}

}  // namespace

double density_kernel(DensityKernel kernel, std::span<const double> u) {
  switch (kernel) {
    case DensityKernel::gaussian: {
      double s = 0.0;
      for (double v : u) s += v * v;
      return std::pow(kInvSqrt2Pi, static_cast<double>(u.size())) * std::exp(-0.5 * s);
    }
    case DensityKernel::uniform: {
      double p = 1.0;
      for (double v : u) p *= uniform_1d(v);
      return p;
    }
  }
  return 0.0;
}

KdeEstimate make_kde(Tensor samples, DensityKernel kernel, double h) {
  if (!(h > 0)) throw ConfigError("KDE bandwidth must be positive");
  if (samples.rows() == 0) throw ConfigError("KDE needs samples");
  return KdeEstimate{std::move(samples), kernel, h};
}

double kde_eval(const KdeEstimate& est, std::span<const double> x) {
  const std::size_t d = est.dim();
  if (x.size() != d) throw ShapeError("kde_eval: query dimension differs from sample dimension");
  std::vector<double> u(d);
  double s = 0.0;
  for (std::size_t i = 0; i < est.samples.rows(); ++i) {
    const auto row = est.samples.row(i);
    for (std::size_t j = 0; j < d; ++j) u[j] = (x[j] - row[j]) / est.h;
    s += density_kernel(est.kernel, u);
  }
  return s / (static_cast<double>(est.samples.rows()) * std::pow(est.h, static_cast<double>(d)));
}

bool RegularityReport::regular(double tol) const {
  if (flagged || std::abs(integral - 1.0) > tol) return false;
  for (const auto& m : moments)
    if (std::abs(m.value) > tol) return false;
  return true;
}

RegularityReport verify_regularity(DensityKernel kernel, std::size_t order, std::size_t dim, std::size_t quad_points) {
  if (dim < 1) throw ConfigError("regularity check needs dim >= 1");
  if (order < 1) throw ConfigError("regularity order must be >= 1");
  if (quad_points < 3) throw ConfigError("regularity check needs at least 3 quadrature points per axis");
  const double lo = -8.0, hi = 8.0;
  const double step = (hi - lo) / static_cast<double>(quad_points - 1);

  RegularityReport rep;
  rep.order = order;
  rep.resolution = quad_points;
  const auto idx = multi_indices(dim, order - 1);
  std::vector<double> acc(idx.size(), 0.0);
  double integral = 0.0, boundary = 0.0;

  std::vector<std::size_t> pos(dim, 0);
  std::vector<double> u(dim);
  while (true) {
    double w = 1.0;
    bool on_edge = false;
    for (std::size_t a = 0; a < dim; ++a) {
      u[a] = lo + step * static_cast<double>(pos[a]);
      const bool edge = pos[a] == 0 || pos[a] + 1 == quad_points;
      w *= edge ? 0.5 * step : step;
      on_edge = on_edge || edge;
    }
    const double k = density_kernel(kernel, u);
    integral += w * k;
    if (on_edge) boundary = std::max(boundary, std::abs(k));
    for (std::size_t m = 0; m < idx.size(); ++m) {
      double mono = 1.0;
      for (std::size_t a = 0; a < dim; ++a) mono *= std::pow(u[a], static_cast<double>(idx[m][a]));
      acc[m] += w * k * mono;
    }
    std::size_t a = 0;
    while (a < dim && ++pos[a] == quad_points) pos[a++] = 0;
    if (a == dim) break;
  }

  rep.integral = integral;
  for (std::size_t m = 0; m < idx.size(); ++m) {
    rep.moments.push_back({idx[m], acc[m]});
    rep.max_abs_moment = std::max(rep.max_abs_moment, std::abs(acc[m]));
  }
  if (!std::isfinite(integral) || !std::isfinite(rep.max_abs_moment)) {
    rep.flagged = true;
    rep.note = "non-finite quadrature value";
  } else if (boundary > 1e-10) {
    rep.flagged = true;
    rep.note = "kernel not negligible on the quadrature box boundary";
  }
  return rep;
}

SmoothedTvCheck smoothed_tv_bound_check(std::span<const double> p, std::span<const double> q, DensityKernel kernel,
                                        double h, std::size_t quad_points, double slack) {
  if (!(h > 0)) throw ConfigError("smoothed TV check needs h > 0");
  if (kernel != DensityKernel::gaussian) throw ConfigError("smoothed TV bound constant is derived for the Gaussian kernel");
  if (p.empty() || q.empty()) throw ConfigError("smoothed TV check needs samples");
  if (quad_points < 3) throw ConfigError("smoothed TV check needs at least 3 quadrature points");
  double lo = std::min(*std::min_element(p.begin(), p.end()), *std::min_element(q.begin(), q.end())) - 10.0 * h;
  double hi = std::max(*std::max_element(p.begin(), p.end()), *std::max_element(q.begin(), q.end())) + 10.0 * h;
  const double step = (hi - lo) / static_cast<double>(quad_points - 1);
  auto smoothed = [h](std::span<const double> s, double x) {
    double v = 0.0;
    for (double c : s) {
      const double t = (x - c) / h;
      v += std::exp(-0.5 * t * t);
    }
    return v * kInvSqrt2Pi / (h * static_cast<double>(s.size()));
  };
  double lhs = 0.0;
  for (std::size_t i = 0; i < quad_points; ++i) {
    const double x = lo + step * static_cast<double>(i);
    const double w = (i == 0 || i + 1 == quad_points) ? 0.5 * step : step;
    lhs += w * std::abs(smoothed(p, x) - smoothed(q, x));
  }
  SmoothedTvCheck out;
  out.lhs = lhs;
  out.rhs = std::sqrt(2.0 / std::numbers::pi) * w1_1d(p, q) / h;
  out.holds = out.lhs <= out.rhs + slack;
  return out;
}

double BandwidthPolicy::bandwidth(std::size_t n) const {
  if (n < 1) throw ConfigError("bandwidth needs n >= 1");
  const double nn = static_cast<double>(n);
  if (rule == BandwidthRule::power) {
    if (!(xi > 0)) throw ConfigError("power bandwidth exponent must be positive");
    return std::pow(nn, -xi);
  }
  if (m < 1 || d < 1) throw ConfigError("robust bandwidth needs m, d >= 1");
  if (epsilon < 0) throw ConfigError("contamination radius must be nonnegative");
  const double dn = static_cast<double>(d), mn = static_cast<double>(m);
  const double stat = std::pow(nn, -1.0 / (dn + 2.0 * mn));
  const double cont = epsilon > 0 ? std::pow(epsilon, 1.0 / (2.0 * dn + mn)) : 0.0;
  return std::max(stat, cont);
}

void GaussianMixture1d::validate() const {
  if (weights.empty() || weights.size() != means.size() || weights.size() != sds.size())
    throw ConfigError("mixture needs matching, non-empty weights, means and sds");
  double s = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0) || !(sds[i] > 0)) throw ConfigError("mixture weights and sds must be positive");
    s += weights[i];
  }
  if (std::abs(s - 1.0) > 1e-9) throw ConfigError("mixture weights must sum to 1");
}

double GaussianMixture1d::density(double x) const {
  double v = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double t = (x - means[i]) / sds[i];
    v += weights[i] * kInvSqrt2Pi / sds[i] * std::exp(-0.5 * t * t);
  }
  return v;
}

Tensor GaussianMixture1d::sample(std::size_t n, Rng& rng) const {
  std::discrete_distribution<std::size_t> comp(weights.begin(), weights.end());
  std::normal_distribution<double> g(0.0, 1.0);
  Tensor x = Tensor::matrix(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = comp(rng);
    x[i] = means[c] + sds[c] * g(rng);
  }
  return x;
}

namespace {

Tensor contaminate_1d(const Tensor& clean, const RobustKdeConfig& cfg, Rng& rng) {
  if (cfg.fraction == 0.0) return clean;
  Tensor out = clean;
  const auto count = static_cast<std::size_t>(std::floor(cfg.fraction * static_cast<double>(clean.rows())));
  const auto idx = sample_without_replacement(clean.rows(), count, rng);
  std::normal_distribution<double> g(0.0, 1.0);
  std::cauchy_distribution<double> c(0.0, 1.0);
  const Tensor from_clean = cfg.contaminate_with_clean ? cfg.clean.sample(count, rng) : Tensor();
  for (std::size_t t = 0; t < idx.size(); ++t) {
    double y = 0.0;
    if (cfg.contaminate_with_clean) y = from_clean[t];
    else if (cfg.law == ContaminationLaw::cauchy) y = c(rng);
    else y = g(rng);
    out[idx[t]] = (1.0 - cfg.level) * clean[idx[t]] + cfg.level * y;
  }
  return out;
}

}  // namespace

RobustKdeTable robust_kde_experiment(const RobustKdeConfig& cfg) {
  cfg.clean.validate();
  if (cfg.n_grid.size() < 3) throw ConfigError("robust KDE experiment needs at least 3 sample sizes");
  for (std::size_t i = 1; i < cfg.n_grid.size(); ++i)
    if (cfg.n_grid[i] <= cfg.n_grid[i - 1]) throw ConfigError("n grid must be strictly increasing");
  if (cfg.reps < 1) throw ConfigError("robust KDE experiment needs reps >= 1");
  if (!(cfg.fraction >= 0 && cfg.fraction <= 1 && cfg.level >= 0 && cfg.level <= 1))
    throw ConfigError("contamination fraction and level must lie in [0, 1]");
  if (cfg.law == ContaminationLaw::dirichlet && cfg.fraction > 0 && !cfg.contaminate_with_clean)
    throw ConfigError("dirichlet contamination is not defined in one dimension");

  RobustKdeTable table;
  {
    // Paired estimate of the excess spread E|X~ - Y| - E|X - Y|: the same
    // index pairs are used for both terms, so only corrupted rows contribute.
    Rng rng = make_rng(derive_seed(cfg.seed, "robust-kde-epsilon"));
    const Tensor ref = cfg.clean.sample(cfg.epsilon_sample, rng);
    const Tensor clean = cfg.clean.sample(cfg.epsilon_sample, rng);
    const Tensor dirty = contaminate_1d(clean, cfg, rng);
    std::uniform_int_distribution<std::size_t> u(0, cfg.epsilon_sample - 1);
    double cross = 0.0, self = 0.0, mean = 0.0, m2 = 0.0;
    for (std::size_t t = 0; t < cfg.epsilon_pairs; ++t) {
      const std::size_t i = u(rng), j = u(rng);
      const double a = std::abs(dirty[i] - ref[j]);
      const double b = std::abs(clean[i] - ref[j]);
      cross += a;
      self += b;
      const double diff = a - b;
      const double delta = diff - mean;
      mean += delta / static_cast<double>(t + 1);
      m2 += delta * (diff - mean);
    }
    const double np = static_cast<double>(cfg.epsilon_pairs);
    table.cross_spread = cross / np;
    table.self_spread = self / np;
    const double se = cfg.epsilon_pairs > 1 ? std::sqrt(m2 / (np - 1.0) / np) : 0.0;
    table.epsilon = std::max(0.0, mean - 3.0 * se);
  }

  BandwidthPolicy policy;
  policy.rule = BandwidthRule::robust;
  policy.m = cfg.m;
  policy.d = 1;
  policy.epsilon = table.epsilon;
  const double truth = cfg.clean.density(cfg.query);
  const std::array<double, 1> q{cfg.query};

  std::vector<double> ns;
  for (std::size_t n : cfg.n_grid) {
    const double h = policy.bandwidth(n);
    double total = 0.0;
    for (std::size_t r = 0; r < cfg.reps; ++r) {
      const std::uint64_t seed = derive_seed(cfg.seed, "robust-kde", {n, r});
      Rng rng = make_rng(seed);
      const Tensor x = contaminate_1d(cfg.clean.sample(n, rng), cfg, rng);
      const double err = std::abs(kde_eval(KdeEstimate{x, cfg.kernel, h}, q) - truth);
      table.rows.push_back({n, table.epsilon, r, h, err, seed});
      total += err;
    }
    table.mean_error.push_back(total / static_cast<double>(cfg.reps));
    ns.push_back(static_cast<double>(n));
  }
  table.full_fit = loglog_fit(ns, table.mean_error);
  const std::size_t half = ns.size() / 2;
  table.top_fit = loglog_fit(std::span<const double>(ns).subspan(half),
                             std::span<const double>(table.mean_error).subspan(half));
  return table;
}

void write_rate_table(std::ostream& out, const RobustKdeTable& table) {
  out << "n,epsilon,rep,h,abs_error,seed\n";
  out.precision(17);
  for (const auto& r : table.rows)
    out << r.n << ',' << r.epsilon << ',' << r.rep << ',' << r.h << ',' << r.abs_error << ',' << r.seed << '\n';
}

}  // namespace densiwae
