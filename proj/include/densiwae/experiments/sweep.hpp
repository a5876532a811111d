#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "densiwae/data/dataset.hpp"
#include "densiwae/stats/regression.hpp"
#include "densiwae/training/wae.hpp"

namespace densiwae {

struct SweepConfig {
  // Template for every cell; its seed is replaced by the derived cell seed.
  WaeConfig wae;
  std::size_t pool_size = 0;  // generated Five-Gaussian rows; 0 -> max of n_grid
  std::vector<std::size_t> n_grid{1000, 3000, 5000, 10000};
  std::size_t runs = 5;
  std::uint64_t master_seed = 0;
  std::string out_dir;  // empty: no files written
  std::size_t workers = 1;
  bool record_timing = true;  // false writes seconds = 0 for byte-stable output

  void validate() const;
};

struct SweepRecord {
  std::size_t n = 0;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  double latent_mmd = 0.0;
  double latent_js = 0.0;
  double latent_tv = 0.0;
  double recon_w1 = 0.0;
  double recon_mse = 0.0;
  double latent_loss = 0.0;  // latent_mmd for MMD runs, latent_js for GAN runs
  double seconds = 0.0;

  double latent_loss_x_n() const { return latent_loss * static_cast<double>(n); }
  double latent_loss_x_sqrtn() const;
};

struct SweepFailure {
  std::size_t n = 0;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  std::string error;
};

struct SweepOutput {
  std::vector<SweepRecord> records;  // sorted by (n, run)
  std::vector<SweepFailure> failures;
};

std::uint64_t cell_seed(std::uint64_t master, std::size_t n, std::size_t run);

/// Trains one cell on a uniform size-n subsample of the pool and returns its
/// final-epoch record.
SweepRecord run_cell(const WaeConfig& wae, const Dataset& pool, std::size_t n, std::size_t run,
                     std::uint64_t master_seed, bool record_timing = true);

/// Runs every (n, run) cell on `workers` threads. Failures are collected per
/// cell; the remaining cells still run.
SweepOutput run_sweep(const SweepConfig& config);
SweepOutput run_sweep(const SweepConfig& config, const Dataset& pool);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records);
void write_failures_csv(std::ostream& out, const std::vector<SweepFailure>& failures);
std::vector<SweepRecord> read_sweep_csv(const std::string& path);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  std::size_t n_min = 0;
  std::size_t n_max = 0;
  std::size_t points = 0;
  std::size_t excluded = 0;  // nonpositive losses dropped before averaging
};

/// OLS of log(mean loss) on log(n) over n in [n_min, n_max].
RateFit fit_rate(const std::vector<SweepRecord>& records, const std::string& loss_column, std::size_t n_min = 0,
                 std::size_t n_max = static_cast<std::size_t>(-1));

double record_column(const SweepRecord& r, const std::string& column);

struct NSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;
  std::size_t count = 0;
};

/// Mean and sample standard deviation of a column per n, ascending n.
std::vector<NSummary> summarize(const std::vector<SweepRecord>& records, const std::string& column);

struct ContaminationCell {
  ContaminationLaw law = ContaminationLaw::dirichlet;
  std::vector<double> dirichlet_params;
  double fraction = 0.0;
  double level = 0.0;
};

struct ContaminationStudyConfig {
  WaeConfig wae;
  std::size_t n = 5000;
  std::vector<ContaminationCell> cells;
  std::size_t runs = 1;
  std::uint64_t master_seed = 0;
  std::size_t epsilon_pairs = 20000;
  std::size_t workers = 1;
  bool record_timing = true;
};

struct ContaminationStudyRecord {
  std::string law;
  double fraction = 0.0;
  double level = 0.0;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  double epsilon = 0.0;
  double epsilon_se = 0.0;
  double latent_mmd = 0.0;
  double recon_w1_clean = 0.0;
  double recon_w1_contaminated = 0.0;
  double seconds = 0.0;
};

struct ContaminationStudyOutput {
  std::vector<ContaminationStudyRecord> records;
  std::vector<SweepFailure> failures;
};

/// Trains on contaminated Five-Gaussian data per cell and scores the
/// reconstructions against the clean rows they came from.
ContaminationStudyOutput run_contamination_study(const ContaminationStudyConfig& config);

void write_contamination_csv(std::ostream& out, const std::vector<ContaminationStudyRecord>& records);

}  // namespace densiwae
