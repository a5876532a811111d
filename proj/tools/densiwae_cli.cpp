// Command-line driver: gen-data, train, sweep, rate-fit, plot, contaminate,
// robust-kde, test2s.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "densiwae/data/dataset.hpp"
#include "densiwae/error.hpp"
#include "densiwae/experiments/config.hpp"
#include "densiwae/experiments/plots.hpp"
#include "densiwae/experiments/setup.hpp"
#include "densiwae/experiments/sweep.hpp"
#include "densiwae/kde/kde.hpp"
#include "densiwae/networks/checkpoint.hpp"
#include "densiwae/stats/two_sample.hpp"
#include "densiwae/training/wae.hpp"

namespace fs = std::filesystem;
using namespace densiwae;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::optional<std::size_t> workers;
  std::vector<std::string> overrides;  // key=value
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "key = value configuration file");
  sub->add_option("--seed", c.seed, "master seed (overrides the 'seed' key)");
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--workers", c.workers, "worker threads (fallback: DENSIWAE_WORKERS, then 1)");
  sub->add_option("--set", c.overrides, "override a config key, key=value (repeatable)");
}

KeyValueConfig load_config(const Common& c) {
  KeyValueConfig cfg = c.config_path.empty() ? KeyValueConfig{} : KeyValueConfig::load(c.config_path);
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

std::uint64_t seed_of(const Common& c, const KeyValueConfig& cfg) {
  if (c.seed) return *c.seed;
  return static_cast<std::uint64_t>(cfg.get_int("seed", 0));
}

std::size_t workers_of(const Common& c) {
  if (c.workers) {
    if (*c.workers == 0) throw ConfigError("--workers must be positive");
    return *c.workers;
  }
  if (const char* env = std::getenv("DENSIWAE_WORKERS")) {
    KeyValueConfig tmp;
    tmp.set("DENSIWAE_WORKERS", env);
    const std::size_t w = tmp.get_size("DENSIWAE_WORKERS", 1);
    if (w == 0) throw ConfigError("DENSIWAE_WORKERS must be positive");
    return w;
  }
  return 1;
}

std::set<std::string> with(std::set<std::string> base, std::initializer_list<std::string> extra) {
  base.insert(extra);
  base.insert("seed");
  return base;
}

std::ofstream open_out(const Common& c, const std::string& name) {
  fs::create_directories(c.out);
  const fs::path path = fs::path(c.out) / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path.string() + "'");
  return f;
}

Tensor read_matrix(const std::string& path, std::size_t dims) {
  const auto rows = read_numeric_csv(path);
  if (rows.empty()) throw ConfigError("CSV '" + path + "' has no rows");
  const std::size_t d = dims == 0 ? rows.front().size() : dims;
  if (d > rows.front().size()) throw ConfigError("CSV '" + path + "' has fewer than " + std::to_string(d) + " columns");
  Tensor t = Tensor::matrix(rows.size(), d);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < d; ++j) t(i, j) = rows[i][j];
  return t;
}

int cmd_gen_data(const Common& c) {
  const auto cfg = load_config(c);
  cfg.require_known(with(wae_config_keys(), {}));
  const Dataset data = load_dataset(cfg, seed_of(c, cfg));
  auto f = open_out(c, "data.csv");
  write_csv(f, data);
  std::cout << "wrote " << data.n() << " rows to " << (fs::path(c.out) / "data.csv").string() << "\n";
  return 0;
}

int cmd_train(const Common& c) {
  const auto cfg = load_config(c);
  cfg.require_known(with(wae_config_keys(), {}));
  const std::uint64_t seed = seed_of(c, cfg);
  const WaeConfig wae = wae_config_from(cfg, seed);
  const Dataset data = load_dataset(cfg, derive_seed(seed, "data"));
  const TrainResult result = train_wae(wae, data);
  {
    auto f = open_out(c, "metrics.csv");
    write_metrics_csv(f, result.metrics);
  }
  save_mlp((fs::path(c.out) / "encoder.bin").string(), result.state.encoder);
  save_mlp((fs::path(c.out) / "decoder.bin").string(), result.state.decoder);
  const MetricRecord& last = result.metrics.back();
  std::cout << "epoch " << last.epoch << " latent_mmd " << last.latent_mmd << " latent_js " << last.latent_js
            << " recon_w1 " << last.recon_w1 << "\n";
  return 0;
}

int cmd_sweep(const Common& c) {
  const auto cfg = load_config(c);
  cfg.require_known(with(wae_config_keys(), {"n_grid", "runs", "pool_size", "record_timing", "plot_column"}));
  SweepConfig s;
  s.master_seed = seed_of(c, cfg);
  s.wae = wae_config_from(cfg, s.master_seed);
  s.n_grid = cfg.get_sizes("n_grid", s.n_grid);
  s.runs = cfg.get_size("runs", s.runs);
  s.pool_size = cfg.get_size("pool_size", 0);
  s.record_timing = cfg.get_bool("record_timing", true);
  s.workers = workers_of(c);
  s.out_dir = c.out;
  const SweepOutput out = run_sweep(s);
  const std::string column = cfg.get_string("plot_column", "latent_loss");
  if (!out.records.empty()) emit_plots(out.records, column, "all", c.out);
  std::cout << out.records.size() << " cells done, " << out.failures.size() << " failed\n";
  return out.records.empty() ? 3 : 0;
}

int cmd_rate_fit(const Common& c, const std::string& csv) {
  const auto cfg = load_config(c);
  cfg.require_known({"column", "n_min", "n_max", "seed"});
  const auto records = read_sweep_csv(csv);
  const RateFit fit = fit_rate(records, cfg.get_string("column", "latent_loss"), cfg.get_size("n_min", 0),
                               cfg.get_size("n_max", static_cast<std::size_t>(-1)));
  auto f = open_out(c, "rate_fit.csv");
  f << "slope,intercept,slope_se,n_min,n_max,points,excluded\n";
  f << fit.slope << ',' << fit.intercept << ',' << fit.slope_se << ',' << fit.n_min << ',' << fit.n_max << ','
    << fit.points << ',' << fit.excluded << '\n';
  std::cout << "slope " << fit.slope << " +- " << fit.slope_se << " over " << fit.points << " n values ("
            << fit.excluded << " excluded)\n";
  return 0;
}

int cmd_plot(const Common& c, const std::string& csv) {
  const auto cfg = load_config(c);
  cfg.require_known({"column", "kind", "seed"});
  const auto records = read_sweep_csv(csv);
  for (const auto& p : emit_plots(records, cfg.get_string("column", "latent_loss"), cfg.get_string("kind", "all"), c.out))
    std::cout << p << "\n";
  return 0;
}

int cmd_contaminate(const Common& c) {
  const auto cfg = load_config(c);
  cfg.require_known(with(wae_config_keys(), {"mode", "laws", "fractions", "levels", "dirichlet", "runs",
                                             "epsilon_pairs", "record_timing", "law", "fraction", "level"}));
  const std::uint64_t seed = seed_of(c, cfg);
  const std::vector<double> dirichlet = cfg.get_doubles("dirichlet", {5.0, 3.0, 5.0});
  const std::string mode = cfg.get_string("mode", "study");
  if (mode == "data") {
    const Dataset clean = load_dataset(cfg, derive_seed(seed, "data"));
    ContaminationSpec spec{cfg.get_double("fraction", 0.5), cfg.get_double("level", 0.2),
                           contamination_law_from_string(cfg.get_string("law", "dirichlet")), dirichlet,
                           derive_seed(seed, "contamination")};
    const Dataset dirty = contaminate(clean, spec);
    const EpsilonEstimate eps = wasserstein_epsilon(clean, dirty, cfg.get_size("epsilon_pairs", 20000), seed);
    auto f = open_out(c, "contaminated.csv");
    write_csv(f, dirty);
    std::cout << "epsilon " << eps.value << " +- " << eps.std_error << "\n";
    return 0;
  }
  if (mode != "study") throw ConfigError("contaminate mode must be 'study' or 'data'");
  ContaminationStudyConfig s;
  s.master_seed = seed;
  s.wae = wae_config_from(cfg, seed);
  s.n = cfg.get_size("n", s.n);
  s.runs = cfg.get_size("runs", s.runs);
  s.epsilon_pairs = cfg.get_size("epsilon_pairs", s.epsilon_pairs);
  s.record_timing = cfg.get_bool("record_timing", true);
  s.workers = workers_of(c);
  const std::string laws = cfg.get_string("laws", "dirichlet,cauchy");
  std::vector<std::string> law_names;
  {
    std::stringstream ss(laws);
    std::string item;
    while (std::getline(ss, item, ',')) law_names.push_back(item);
  }
  for (const auto& name : law_names)
    for (double fr : cfg.get_doubles("fractions", {0.1, 0.5}))
      for (double lv : cfg.get_doubles("levels", {0.2}))
        s.cells.push_back({contamination_law_from_string(name), dirichlet, fr, lv});
  const auto out = run_contamination_study(s);
  {
    auto f = open_out(c, "contamination.csv");
    write_contamination_csv(f, out.records);
  }
  {
    auto f = open_out(c, "failures.csv");
    write_failures_csv(f, out.failures);
  }
  std::cout << out.records.size() << " cells done, " << out.failures.size() << " failed\n";
  return out.records.empty() ? 3 : 0;
}

int cmd_robust_kde(const Common& c) {
  const auto cfg = load_config(c);
  cfg.require_known({"n_grid", "reps", "m", "query", "fraction", "level", "law", "contaminate_with_clean",
                     "epsilon_sample", "epsilon_pairs", "kernel", "seed"});
  RobustKdeConfig r;
  r.seed = seed_of(c, cfg);
  r.n_grid = cfg.get_sizes("n_grid", r.n_grid);
  r.reps = cfg.get_size("reps", r.reps);
  r.m = cfg.get_size("m", r.m);
  r.query = cfg.get_double("query", r.query);
  r.fraction = cfg.get_double("fraction", r.fraction);
  r.level = cfg.get_double("level", r.level);
  r.law = contamination_law_from_string(cfg.get_string("law", "cauchy"));
  r.contaminate_with_clean = cfg.get_bool("contaminate_with_clean", false);
  r.epsilon_sample = cfg.get_size("epsilon_sample", r.epsilon_sample);
  r.epsilon_pairs = cfg.get_size("epsilon_pairs", r.epsilon_pairs);
  const std::string kernel = cfg.get_string("kernel", "gaussian");
  if (kernel == "gaussian") r.kernel = DensityKernel::gaussian;
  else if (kernel == "uniform") r.kernel = DensityKernel::uniform;
  else throw ConfigError("unknown density kernel '" + kernel + "'");
  const RobustKdeTable table = robust_kde_experiment(r);
  auto f = open_out(c, "robust_kde.csv");
  write_rate_table(f, table);
  std::cout << "epsilon " << table.epsilon << " slope " << table.full_fit.slope << " top-half slope "
            << table.top_fit.slope << "\n";
  return 0;
}

int cmd_test2s(const Common& c) {
  const auto cfg = load_config(c);
  cfg.require_known({"x", "y", "dims", "test", "method", "replications", "seed"});
  if (!cfg.has("x") || !cfg.has("y")) throw ConfigError("test2s needs 'x' and 'y' CSV paths");
  const std::size_t dims = cfg.get_size("dims", 0);
  const Tensor x = read_matrix(cfg.get_string("x", ""), dims);
  const Tensor y = read_matrix(cfg.get_string("y", ""), dims);
  const std::uint64_t seed = seed_of(c, cfg);
  const std::size_t reps = cfg.get_size("replications", 999);
  const std::string test = cfg.get_string("test", "cramer");
  TestResult result;
  if (test == "ff") {
    result = ff_test(x, y, reps, seed);
  } else if (test == "cramer") {
    const std::string method = cfg.get_string("method", "monte_carlo");
    CramerMethod m;
    if (method == "monte_carlo") m = CramerMethod::monte_carlo;
    else if (method == "eigenvalue") m = CramerMethod::eigenvalue;
    else throw ConfigError("unknown Cramer method '" + method + "'");
    result = cramer_test(x, y, m, reps, seed);
  } else {
    throw ConfigError("unknown test '" + test + "'");
  }
  auto f = open_out(c, "test2s.csv");
  write_test_header(f);
  write_test_row(f, result);
  std::cout << result.test << " statistic " << result.statistic << " p " << result.p_value << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"densiwae: Wasserstein autoencoder experiments"};
  app.require_subcommand(1);
  Common common;
  std::string csv;
  auto* gen = app.add_subcommand("gen-data", "sample a dataset to CSV");
  auto* train = app.add_subcommand("train", "train one WAE");
  auto* sweep = app.add_subcommand("sweep", "train over an (n, run) grid");
  auto* rate = app.add_subcommand("rate-fit", "log-log slope of a sweep column");
  auto* plot = app.add_subcommand("plot", "SVG plots from a sweep CSV");
  auto* cont = app.add_subcommand("contaminate", "contamination study or contaminated data");
  auto* kde = app.add_subcommand("robust-kde", "robust KDE rate table");
  auto* t2s = app.add_subcommand("test2s", "two-sample test between two CSVs");
  for (auto* s : {gen, train, sweep, rate, plot, cont, kde, t2s}) add_common(s, common);
  rate->add_option("--csv", csv, "sweep CSV")->required();
  plot->add_option("--csv", csv, "sweep CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(common);
    if (train->parsed()) return cmd_train(common);
    if (sweep->parsed()) return cmd_sweep(common);
    if (rate->parsed()) return cmd_rate_fit(common, csv);
    if (plot->parsed()) return cmd_plot(common, csv);
    if (cont->parsed()) return cmd_contaminate(common);
    if (kde->parsed()) return cmd_robust_kde(common);
    if (t2s->parsed()) return cmd_test2s(common);
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
