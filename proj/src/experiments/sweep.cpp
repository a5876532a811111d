#include "densiwae/experiments/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "densiwae/divergences/transport.hpp"
#include "densiwae/error.hpp"
#include "densiwae/experiments/config.hpp"
#include "densiwae/networks/mlp.hpp"

namespace densiwae {

namespace {

// Runs task(i) for i in [0, count) on up to `workers` threads, each pulling
// the next unclaimed index.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& task) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) task(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

// Rows of `data` selected for a size-n cell; the whole pool in order when
// n equals its size.
std::vector<std::size_t> cell_rows(std::size_t pool_n, std::size_t n, std::uint64_t seed) {
  if (n > pool_n) throw ConfigError("cell size " + std::to_string(n) + " exceeds pool size " + std::to_string(pool_n));
  if (n == pool_n) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
  }
  Rng rng = make_rng(derive_seed(seed, "subsample"));
  return sample_without_replacement(pool_n, n, rng);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path.string() + "'");
  body(f);
}

}  // namespace

void SweepConfig::validate() const {
  if (n_grid.empty()) throw ConfigError("sweep n grid is empty");
  if (runs == 0) throw ConfigError("sweep needs at least one run");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 2) throw ConfigError("sweep n values must be at least 2");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) throw ConfigError("sweep n grid must be strictly increasing");
  }
  const std::size_t largest = *std::max_element(n_grid.begin(), n_grid.end());
  if (pool_size != 0 && pool_size < largest) throw ConfigError("pool size is smaller than the largest n");
  if (workers == 0) throw ConfigError("workers must be positive");
  wae.validate(3);
}

double SweepRecord::latent_loss_x_sqrtn() const { return latent_loss * std::sqrt(static_cast<double>(n)); }

std::uint64_t cell_seed(std::uint64_t master, std::size_t n, std::size_t run) {
  return derive_seed(master, "cell", {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(run)});
}

SweepRecord run_cell(const WaeConfig& wae, const Dataset& pool, std::size_t n, std::size_t run,
                     std::uint64_t master_seed, bool record_timing) {
  const auto t0 = std::chrono::steady_clock::now();
  SweepRecord rec;
  rec.n = n;
  rec.run = run;
  rec.seed = cell_seed(master_seed, n, run);
  WaeConfig cfg = wae;
  cfg.seed = rec.seed;
  const auto rows = cell_rows(pool.n(), n, rec.seed);
  const Dataset data = rows.size() == pool.n() ? pool : pool.subset(rows);
  const TrainResult result = train_wae(cfg, data);
  if (result.metrics.empty()) throw NumericalError("training produced no metrics");
  const MetricRecord& last = result.metrics.back();
  rec.latent_mmd = last.latent_mmd;
  rec.latent_js = last.latent_js;
  rec.latent_tv = last.latent_tv;
  rec.recon_w1 = last.recon_w1;
  rec.recon_mse = last.recon_mse;
  rec.latent_loss = wae.divergence == DivergenceKind::gan ? last.latent_js : last.latent_mmd;
  rec.seconds = record_timing ? seconds_since(t0) : 0.0;
  return rec;
}

SweepOutput run_sweep(const SweepConfig& config) {
  config.validate();
  const std::size_t largest = *std::max_element(config.n_grid.begin(), config.n_grid.end());
  const std::size_t pool_n = config.pool_size == 0 ? largest : config.pool_size;
  return run_sweep(config, sample_five_gaussian(pool_n, derive_seed(config.master_seed, "pool")));
}

SweepOutput run_sweep(const SweepConfig& config, const Dataset& pool) {
  if (config.n_grid.empty() || config.runs == 0) throw ConfigError("sweep grid is empty");
  struct Cell {
    std::size_t n, run;
  };
  std::vector<Cell> cells;
  std::vector<std::size_t> grid = config.n_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  for (std::size_t n : grid)
    for (std::size_t r = 0; r < config.runs; ++r) cells.push_back({n, r});

  std::vector<std::optional<SweepRecord>> done(cells.size());
  std::vector<std::optional<SweepFailure>> failed(cells.size());
  parallel_for(cells.size(), config.workers, [&](std::size_t i) {
    const Cell c = cells[i];
    try {
      done[i] = run_cell(config.wae, pool, c.n, c.run, config.master_seed, config.record_timing);
    } catch (const std::exception& e) {
      failed[i] = SweepFailure{c.n, c.run, cell_seed(config.master_seed, c.n, c.run), e.what()};
    }
  });

  SweepOutput out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (done[i]) out.records.push_back(*done[i]);
    if (failed[i]) out.failures.push_back(*failed[i]);
  }
  if (!config.out_dir.empty()) {
    std::filesystem::create_directories(config.out_dir);
    const std::filesystem::path dir(config.out_dir);
    write_file(dir / "sweep.csv", [&](std::ostream& f) { write_sweep_csv(f, out.records); });
    write_file(dir / "failures.csv", [&](std::ostream& f) { write_failures_csv(f, out.failures); });
  }
  return out;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records) {
  out << "n,run,seed,latent_mmd,latent_js,latent_tv,recon_w1,recon_mse,latent_loss,latent_loss_x_n,"
         "latent_loss_x_sqrtn,seconds\n";
  for (const auto& r : records) {
    out << r.n << ',' << r.run << ',' << r.seed << ',' << fmt(r.latent_mmd) << ',' << fmt(r.latent_js) << ','
        << fmt(r.latent_tv) << ',' << fmt(r.recon_w1) << ',' << fmt(r.recon_mse) << ',' << fmt(r.latent_loss) << ','
        << fmt(r.latent_loss_x_n()) << ',' << fmt(r.latent_loss_x_sqrtn()) << ',' << fmt(r.seconds) << '\n';
  }
}

void write_failures_csv(std::ostream& out, const std::vector<SweepFailure>& failures) {
  out << "n,run,seed,error\n";
  for (const auto& f : failures) {
    std::string msg = f.error;
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    out << f.n << ',' << f.run << ',' << f.seed << ',' << msg << '\n';
  }
}

std::vector<SweepRecord> read_sweep_csv(const std::string& path) {
  // Seeds are 64-bit and do not survive a trip through double, so that
  // column is read as text.
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open sweep CSV '" + path + "'");
  std::string line;
  if (!std::getline(f, line)) throw ConfigError("sweep CSV '" + path + "' is empty");
  std::vector<SweepRecord> out;
  std::size_t lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 12) throw ConfigError("sweep CSV line " + std::to_string(lineno) + ": expected 12 columns");
    try {
      SweepRecord r;
      r.n = std::stoull(cells[0]);
      r.run = std::stoull(cells[1]);
      r.seed = std::stoull(cells[2]);
      r.latent_mmd = std::stod(cells[3]);
      r.latent_js = std::stod(cells[4]);
      r.latent_tv = std::stod(cells[5]);
      r.recon_w1 = std::stod(cells[6]);
      r.recon_mse = std::stod(cells[7]);
      r.latent_loss = std::stod(cells[8]);
      r.seconds = std::stod(cells[11]);
      out.push_back(r);
    } catch (const std::exception&) {
      throw ConfigError("sweep CSV line " + std::to_string(lineno) + ": unparseable value");
    }
  }
  if (out.empty()) throw ConfigError("sweep CSV '" + path + "' has no rows");
  return out;
}

double record_column(const SweepRecord& r, const std::string& column) {
  if (column == "latent_mmd") return r.latent_mmd;
  if (column == "latent_js") return r.latent_js;
  if (column == "latent_tv") return r.latent_tv;
  if (column == "recon_w1") return r.recon_w1;
  if (column == "recon_mse") return r.recon_mse;
  if (column == "latent_loss") return r.latent_loss;
  if (column == "latent_loss_x_n") return r.latent_loss_x_n();
  if (column == "latent_loss_x_sqrtn") return r.latent_loss_x_sqrtn();
  if (column == "seconds") return r.seconds;
  throw ConfigError("unknown sweep column '" + column + "'");
}

std::vector<NSummary> summarize(const std::vector<SweepRecord>& records, const std::string& column) {
  std::map<std::size_t, std::vector<double>> by_n;
  for (const auto& r : records) by_n[r.n].push_back(record_column(r, column));
  std::vector<NSummary> out;
  for (const auto& [n, vals] : by_n) {
    NSummary s;
    s.n = n;
    s.count = vals.size();
    s.mean = std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
    if (vals.size() > 1) {
      double ss = 0.0;
      for (double v : vals) ss += (v - s.mean) * (v - s.mean);
      s.sd = std::sqrt(ss / static_cast<double>(vals.size() - 1));
    }
    out.push_back(s);
  }
  return out;
}

RateFit fit_rate(const std::vector<SweepRecord>& records, const std::string& loss_column, std::size_t n_min,
                 std::size_t n_max) {
  RateFit fit;
  std::map<std::size_t, std::vector<double>> by_n;
  for (const auto& r : records) {
    if (r.n < n_min || r.n > n_max) continue;
    const double v = record_column(r, loss_column);
    if (!(v > 0.0) || !std::isfinite(v)) {
      ++fit.excluded;
      continue;
    }
    by_n[r.n].push_back(v);
  }
  if (by_n.size() < 3) throw ConfigError("rate fit needs at least 3 distinct n values with positive losses");
  std::vector<double> xs, ys;
  for (const auto& [n, vals] : by_n) {
    xs.push_back(static_cast<double>(n));
    ys.push_back(std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size()));
  }
  const LineFit line = loglog_fit(xs, ys);
  fit.slope = line.slope;
  fit.intercept = line.intercept;
  fit.slope_se = line.slope_se;
  fit.points = xs.size();
  fit.n_min = by_n.begin()->first;
  fit.n_max = by_n.rbegin()->first;
  return fit;
}

ContaminationStudyOutput run_contamination_study(const ContaminationStudyConfig& config) {
  if (config.cells.empty()) throw ConfigError("contamination study has no cells");
  if (config.runs == 0 || config.n < 2) throw ConfigError("contamination study needs runs >= 1 and n >= 2");
  config.wae.validate(3);
  for (const auto& c : config.cells) {
    ContaminationSpec spec{c.fraction, c.level, c.law, c.dirichlet_params, 0};
    spec.validate();
  }

  const std::size_t total = config.cells.size() * config.runs;
  std::vector<std::optional<ContaminationStudyRecord>> done(total);
  std::vector<std::optional<SweepFailure>> failed(total);
  parallel_for(total, config.workers, [&](std::size_t i) {
    const std::size_t ci = i / config.runs;
    const std::size_t run = i % config.runs;
    const ContaminationCell& cell = config.cells[ci];
    const std::uint64_t seed = cell_seed(config.master_seed, config.n, run);
    try {
      const auto t0 = std::chrono::steady_clock::now();
      // The clean pool depends on the run only, so cells in one run share it
      // and a level-0 cell trains on exactly the uncontaminated data.
      const Dataset clean = sample_five_gaussian(config.n, derive_seed(config.master_seed, "pool", {run}));
      ContaminationSpec spec{cell.fraction, cell.level, cell.law, cell.dirichlet_params,
                             derive_seed(config.master_seed, "contamination", {ci, run})};
      const Dataset dirty = contaminate(clean, spec);

      WaeConfig cfg = config.wae;
      cfg.seed = seed;
      const TrainResult result = train_wae(cfg, dirty);
      if (result.metrics.empty()) throw NumericalError("training produced no metrics");
      const MetricRecord& last = result.metrics.back();

      const std::uint64_t eval_seed = derive_seed(seed, "recon-eval");
      Rng rng = make_rng(eval_seed);
      const std::size_t cap = std::min(config.wae.recon_eval_cap, config.n);
      const auto rows = sample_without_replacement(config.n, cap, rng);
      const Tensor dirty_rows = dirty.x.select_rows(rows);
      const Tensor clean_rows = clean.x.select_rows(rows);
      const Tensor recon = forward(result.state.decoder, forward(result.state.encoder, dirty_rows));

      ContaminationStudyRecord rec;
      rec.law = to_string(cell.law);
      rec.fraction = cell.fraction;
      rec.level = cell.level;
      rec.run = run;
      rec.seed = seed;
      const EpsilonEstimate eps =
          wasserstein_epsilon(clean, dirty, config.epsilon_pairs, derive_seed(seed, "epsilon", {ci}));
      rec.epsilon = eps.value;
      rec.epsilon_se = eps.std_error;
      rec.latent_mmd = last.latent_mmd;
      rec.recon_w1_clean = w1_exact(clean_rows, recon);
      rec.recon_w1_contaminated = w1_exact(dirty_rows, recon);
      rec.seconds = config.record_timing ? seconds_since(t0) : 0.0;
      done[i] = rec;
    } catch (const std::exception& e) {
      failed[i] = SweepFailure{config.n, run, seed, e.what()};
    }
  });

  ContaminationStudyOutput out;
  for (std::size_t i = 0; i < total; ++i) {
    if (done[i]) out.records.push_back(*done[i]);
    if (failed[i]) out.failures.push_back(*failed[i]);
  }
  return out;
}

void write_contamination_csv(std::ostream& out, const std::vector<ContaminationStudyRecord>& records) {
  out << "law,fraction,level,run,seed,epsilon,epsilon_se,latent_mmd,recon_w1_clean,recon_w1_contaminated,seconds\n";
  for (const auto& r : records) {
    out << r.law << ',' << fmt(r.fraction) << ',' << fmt(r.level) << ',' << r.run << ',' << r.seed << ','
        << fmt(r.epsilon) << ',' << fmt(r.epsilon_se) << ',' << fmt(r.latent_mmd) << ',' << fmt(r.recon_w1_clean)
        << ',' << fmt(r.recon_w1_contaminated) << ',' << fmt(r.seconds) << '\n';
  }
}

}  // namespace densiwae
