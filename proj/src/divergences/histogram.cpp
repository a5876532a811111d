#include "densiwae/divergences/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "densiwae/error.hpp"

namespace densiwae {

namespace {

std::size_t bin_of(double v, double lo, double hi, std::size_t bins) {
  if (!(hi > lo)) return 0;
  const double t = (v - lo) / (hi - lo) * static_cast<double>(bins);
  if (!(t > 0)) return 0;  // also catches NaN
  return std::min(bins - 1, static_cast<std::size_t>(t));
}

std::vector<double> masses(const HistogramGrid& g, const Tensor& x) {
  std::vector<double> m(g.cell_count(), 0.0);
  if (x.rows() == 0) return m;
  const double w = 1.0 / static_cast<double>(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    std::size_t flat = 0;
    for (std::size_t a = 0; a < g.bins.size(); ++a) flat = flat * g.bins[a] + bin_of(x(r, a), g.lo[a], g.hi[a], g.bins[a]);
    m[flat] += w;
  }
  return m;
}

}  // namespace

std::size_t HistogramGrid::cell_count() const {
  std::size_t c = 1;
  for (auto b : bins) c *= b;
  return bins.empty() ? 0 : c;
}

HistogramGrid fill_grid(HistogramGrid grid, const Tensor& x, const Tensor& y) {
  if (grid.cell_count() == 0) throw ConfigError("histogram grid is empty");
  if (x.cols() != grid.bins.size() || y.cols() != grid.bins.size()) throw ShapeError("histogram: sample dimension differs from grid");
  grid.p = masses(grid, x);
  grid.q = masses(grid, y);
  return grid;
}

HistogramGrid make_grid(const Tensor& x, const Tensor& y, std::size_t bins_per_axis, double pad) {
  if (bins_per_axis == 0) throw ConfigError("histogram needs at least one bin per axis");
  if (x.cols() != y.cols()) throw ShapeError("histogram: dimensions differ");
  if (x.rows() == 0 && y.rows() == 0) throw ConfigError("histogram needs samples");
  const std::size_t d = x.cols();
  HistogramGrid g;
  g.lo.assign(d, std::numeric_limits<double>::infinity());
  g.hi.assign(d, -std::numeric_limits<double>::infinity());
  for (const Tensor* t : {&x, &y})
    for (std::size_t r = 0; r < t->rows(); ++r)
      for (std::size_t a = 0; a < d; ++a) {
        g.lo[a] = std::min(g.lo[a], (*t)(r, a));
        g.hi[a] = std::max(g.hi[a], (*t)(r, a));
      }
  for (std::size_t a = 0; a < d; ++a) {
    const double span = g.hi[a] - g.lo[a];
    const double widen = span > 0 ? pad * span : 0.5;
    g.lo[a] -= widen;
    g.hi[a] += widen;
  }
  g.bins.assign(d, bins_per_axis);
  return fill_grid(std::move(g), x, y);
}

double tv_masses(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size() || p.empty()) throw ConfigError("TV needs equal-length non-empty mass vectors");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return std::clamp(0.5 * s, 0.0, 1.0);
}

double js_masses(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size() || p.empty()) throw ConfigError("JS needs equal-length non-empty mass vectors");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0) s += 0.5 * p[i] * std::log(p[i] / m);
    if (q[i] > 0) s += 0.5 * q[i] * std::log(q[i] / m);
  }
  return std::clamp(s, 0.0, std::log(2.0));
}

double hist_tv(const Tensor& x, const Tensor& y, const HistogramGrid& grid) {
  const auto g = fill_grid(grid, x, y);
  return tv_masses(g.p, g.q);
}

double hist_js(const Tensor& x, const Tensor& y, const HistogramGrid& grid) {
  const auto g = fill_grid(grid, x, y);
  return js_masses(g.p, g.q);
}

PluginDivergences plugin_divergences(const Tensor& x, const Tensor& y, std::size_t bins_per_axis) {
  if (x.cols() != y.cols()) throw ShapeError("plugin divergences: dimensions differ");
  PluginDivergences out;
  if (x.cols() <= 3) {
    const auto g = make_grid(x, y, bins_per_axis);
    out.tv = tv_masses(g.p, g.q);
    out.js = js_masses(g.p, g.q);
    return out;
  }
  out.marginal = true;
  for (std::size_t a = 0; a < x.cols(); ++a) {
    Tensor xa = Tensor::matrix(x.rows(), 1), ya = Tensor::matrix(y.rows(), 1);
    for (std::size_t r = 0; r < x.rows(); ++r) xa[r] = x(r, a);
    for (std::size_t r = 0; r < y.rows(); ++r) ya[r] = y(r, a);
    const auto g = make_grid(xa, ya, bins_per_axis);
    out.tv += tv_masses(g.p, g.q);
    out.js += js_masses(g.p, g.q);
  }
  out.tv /= static_cast<double>(x.cols());
  out.js /= static_cast<double>(x.cols());
  return out;
}

}  // namespace densiwae
