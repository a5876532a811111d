#pragma once

#include <string>
#include <vector>

#include "densiwae/experiments/sweep.hpp"

namespace densiwae {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> err;  // empty or one half-width per point
};

/// Log-x scatter plot with error bars. Output bytes depend only on the input.
std::string render_svg(const std::string& title, const std::string& y_label, const std::vector<PlotSeries>& series);

/// Mean +- sd of `column` per n.
PlotSeries summary_series(const std::vector<SweepRecord>& records, const std::string& column);

/// Per-n means of latent_loss scaled by n and by sqrt(n).
std::vector<PlotSeries> corrected_series(const std::vector<SweepRecord>& records);

/// Writes loss.svg (mean +- sd of `column`), recon.svg and corrected.svg to
/// out_dir and returns their paths. kind is "loss", "corrected" or "all".
std::vector<std::string> emit_plots(const std::vector<SweepRecord>& records, const std::string& column,
                                    const std::string& kind, const std::string& out_dir);

}  // namespace densiwae
