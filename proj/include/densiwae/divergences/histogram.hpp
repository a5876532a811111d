#pragma once

#include <vector>

#include "densiwae/autodiff/tensor.hpp"

namespace densiwae {

/// Regular tensor-product grid with bin masses for two sample sets.
struct HistogramGrid {
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<std::size_t> bins;
  std::vector<double> p;  // masses of the first set, flattened row-major over axes
  std::vector<double> q;

  std::size_t cell_count() const;
};

/// Grid over the pooled bounding box, widened by `pad` of the range per side,
/// with masses for x and y filled in. Points on or beyond the edges fall in
/// the edge bins.
HistogramGrid make_grid(const Tensor& x, const Tensor& y, std::size_t bins_per_axis = 50, double pad = 0.05);

/// Recomputes masses of x and y on an existing grid.
HistogramGrid fill_grid(HistogramGrid grid, const Tensor& x, const Tensor& y);

/// 0.5 * sum |p - q|.
double tv_masses(const std::vector<double>& p, const std::vector<double>& q);
/// Jensen-Shannon divergence, natural log, 0 log 0 = 0.
double js_masses(const std::vector<double>& p, const std::vector<double>& q);

double hist_tv(const Tensor& x, const Tensor& y, const HistogramGrid& grid);
double hist_js(const Tensor& x, const Tensor& y, const HistogramGrid& grid);

struct PluginDivergences {
  double tv = 0.0;
  double js = 0.0;
  bool marginal = false;  // averaged over 1D marginals
};

/// Joint-grid TV and JS for d <= 3; averages of 1D-marginal TV and JS above.
PluginDivergences plugin_divergences(const Tensor& x, const Tensor& y, std::size_t bins_per_axis = 50);

}  // namespace densiwae
