#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "densiwae/autodiff/tensor.hpp"
#include "densiwae/data/dataset.hpp"
#include "densiwae/stats/regression.hpp"

namespace densiwae {

/// Density-type kernels, each integrating to one over R^d.
///  gaussian: (2 pi)^{-d/2} exp(-|u|^2 / 2)
///  uniform:  indicator of [-1/2, 1/2]^d, with value 1/2 per axis on the faces
enum class DensityKernel { gaussian, uniform };

double density_kernel(DensityKernel kernel, std::span<const double> u);

struct KdeEstimate {
  Tensor samples;
  DensityKernel kernel = DensityKernel::gaussian;
  double h = 1.0;

  std::size_t dim() const { return samples.cols(); }
};

KdeEstimate make_kde(Tensor samples, DensityKernel kernel, double h);

/// (1 / (n h^d)) sum_i kernel((x - x_i) / h).
double kde_eval(const KdeEstimate& est, std::span<const double> x);

struct MomentValue {
  std::vector<std::size_t> exponents;
  double value = 0.0;
};

struct RegularityReport {
  double integral = 0.0;
  std::vector<MomentValue> moments;  // all multi-indices with 1 <= |alpha| <= order - 1
  double max_abs_moment = 0.0;
  std::size_t order = 0;
  std::size_t resolution = 0;  // quadrature points per axis
  bool flagged = false;        // non-finite values or mass at the box boundary
  std::string note;

  /// |integral - 1| <= tol and every listed moment within tol of 0.
  bool regular(double tol) const;
};

/// Tensor-product trapezoid quadrature on [-8, 8]^d.
RegularityReport verify_regularity(DensityKernel kernel, std::size_t order, std::size_t dim,
                                   std::size_t quad_points);

struct SmoothedTvCheck {
  double lhs = 0.0;  // |K_h * P - K_h * Q|_1
  double rhs = 0.0;  // sqrt(2 / pi) W1(P, Q) / h
  bool holds = false;
};

/// 1D check of |K_h P - K_h Q|_1 <= sqrt(2/pi) W1(P, Q) / h for the Gaussian
/// kernel; the L1 norm is a trapezoid integral over the padded sample range.
SmoothedTvCheck smoothed_tv_bound_check(std::span<const double> p, std::span<const double> q, DensityKernel kernel,
                                        double h, std::size_t quad_points = 20001, double slack = 1e-3);

enum class BandwidthRule { power, robust };

struct BandwidthPolicy {
  BandwidthRule rule = BandwidthRule::power;
  double xi = 0.2;          // power: h = n^{-xi}
  std::size_t m = 2;        // robust: smoothness order
  std::size_t d = 1;        // robust: dimension
  double epsilon = 0.0;     // robust: contamination radius

  /// power: n^{-xi}; robust: max(n^{-1/(d+2m)}, epsilon^{1/(2d+m)}).
  double bandwidth(std::size_t n) const;
};

/// 1D Gaussian mixture with analytic density.
struct GaussianMixture1d {
  std::vector<double> weights{0.5, 0.5};
  std::vector<double> means{-1.0, 1.5};
  std::vector<double> sds{1.0, 0.7};

  void validate() const;
  double density(double x) const;
  Tensor sample(std::size_t n, Rng& rng) const;
};

struct RobustKdeConfig {
  GaussianMixture1d clean;
  std::vector<std::size_t> n_grid{500, 1000, 2000, 4000, 8000, 16000, 32000};
  std::size_t reps = 200;
  std::size_t m = 2;
  double query = 0.0;
  // Contamination; fraction 0 means clean data. `contaminate_with_clean`
  // replaces the contaminating law by the clean mixture itself.
  double fraction = 0.0;
  double level = 0.0;
  ContaminationLaw law = ContaminationLaw::cauchy;
  bool contaminate_with_clean = false;
  std::size_t epsilon_sample = 20000;
  std::size_t epsilon_pairs = 200000;
  std::uint64_t seed = 0;
  DensityKernel kernel = DensityKernel::gaussian;
};

struct RobustKdeRow {
  std::size_t n = 0;
  double epsilon = 0.0;
  std::size_t rep = 0;
  double h = 0.0;
  double abs_error = 0.0;
  std::uint64_t seed = 0;
};

struct RobustKdeTable {
  std::vector<RobustKdeRow> rows;
  double epsilon = 0.0;      // radius used by the bandwidth rule
  double cross_spread = 0.0; // E|X_contaminated - Y_clean|
  double self_spread = 0.0;  // E|X_clean - Y_clean|
  std::vector<double> mean_error;  // per n, in grid order
  LineFit full_fit;          // log mean error vs log n over the whole grid
  LineFit top_fit;           // same over the upper half of the grid
};

/// Mean |p_hat_h(query) - p(query)| per n with the robust bandwidth rule.
/// epsilon = max(0, cross - self - 3 SE) estimated once from large samples,
/// so contamination by the clean law itself yields epsilon close to 0.
RobustKdeTable robust_kde_experiment(const RobustKdeConfig& config);

void write_rate_table(std::ostream& out, const RobustKdeTable& table);

}  // namespace densiwae
