#pragma once

#include <span>

namespace densiwae {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares y = intercept + slope * x. Needs >= 2 distinct x;
/// the standard error is 0 with only two points.
LineFit ols(std::span<const double> x, std::span<const double> y);

/// OLS on (log x, log y). Pairs with y <= 0 must be filtered by the caller.
LineFit loglog_fit(std::span<const double> x, std::span<const double> y);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace densiwae
