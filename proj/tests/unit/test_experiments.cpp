#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "densiwae/error.hpp"
#include "densiwae/experiments/config.hpp"
#include "densiwae/experiments/plots.hpp"
#include "densiwae/experiments/setup.hpp"
#include "densiwae/experiments/sweep.hpp"

using namespace densiwae;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("densiwae_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<SweepRecord> power_law(double c, double slope, const std::vector<std::size_t>& ns, std::size_t runs,
                                   double noise = 0.0, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<SweepRecord> out;
  for (std::size_t n : ns)
    for (std::size_t r = 0; r < runs; ++r) {
      SweepRecord rec;
      rec.n = n;
      rec.run = r;
      rec.latent_loss = c * std::pow(static_cast<double>(n), slope) * (1.0 + noise * g(rng));
      rec.latent_mmd = rec.latent_loss;
      out.push_back(rec);
    }
  return out;
}

WaeConfig tiny_wae() {
  WaeConfig c = five_gaussian_config(latent_law_from_string("gaussian", 2), DivergenceKind::mmd, 0.2);
  c.epochs = 3;
  c.batch_size = 32;
  c.latent_eval_cap = 200;
  c.recon_eval_cap = 60;
  return c;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DENSIWAE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("key value config") {
  const auto c = KeyValueConfig::parse("# comment\n\nlambda = 0.5\nn_grid = 10, 20,30\nname=abc\nflag = true\nlambda=0.7\n");
  CHECK(c.get_double("lambda", 0) == 0.7);
  CHECK(c.get_sizes("n_grid", {}) == std::vector<std::size_t>{10, 20, 30});
  CHECK(c.get_string("name", "") == "abc");
  CHECK(c.get_bool("flag", false));
  CHECK(c.get_int("missing", -4) == -4);
  CHECK_NOTHROW(c.require_known({"lambda", "n_grid", "name", "flag"}));
  CHECK_THROWS_AS(c.require_known({"lambda", "n_grid", "name"}), ConfigError);
  CHECK_THROWS_AS(c.get_double("name", 0), ConfigError);
  CHECK_THROWS_AS(KeyValueConfig::parse("no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(KeyValueConfig::load("/nonexistent/densiwae.cfg"), ConfigError);
}

TEST_CASE("wae config from keys") {
  KeyValueConfig kv;
  kv.set("lambda", "0.4");
  kv.set("latent", "beta");
  kv.set("latent_dim", "3");
  kv.set("epochs", "7");
  const WaeConfig c = wae_config_from(kv, 5);
  CHECK(c.lambda == 0.4);
  CHECK(c.latent.kind == LatentKind::beta_marginals);
  CHECK(c.latent.k == 3);
  CHECK(c.epochs == 7);
  CHECK(c.encoder.output == OutputTransform::affine_rescale);
  CHECK(c.encoder.output_width() == 3);
  CHECK(c.decoder.input_width() == 3);
  kv.set("divergence", "nonsense");
  CHECK_THROWS_AS(wae_config_from(kv, 5), ConfigError);
}

TEST_CASE("rate fit") {
  const std::vector<std::size_t> ns{1000, 3000, 5000, 10000};
  SUBCASE("exact power law") {
    const RateFit f = fit_rate(power_law(2.0, -0.5, ns, 3), "latent_loss");
    CHECK(f.slope == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(std::exp(f.intercept) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(f.points == 4);
    CHECK(f.excluded == 0);
    CHECK(f.n_min == 1000);
    CHECK(f.n_max == 10000);
  }
  SUBCASE("constant loss") {
    CHECK(std::abs(fit_rate(power_law(0.3, 0.0, ns, 2), "latent_loss").slope) < 1e-12);
  }
  SUBCASE("noisy power law") {
    const RateFit f = fit_rate(power_law(1.0, -0.5, ns, 5, 0.05, 7), "latent_loss");
    CHECK(std::abs(f.slope + 0.5) < 0.05);
  }
  SUBCASE("rescaling the loss leaves the slope unchanged") {
    for (int trial = 0; trial < 20; ++trial) {
      auto recs = power_law(1.0, -0.4, ns, 3, 0.1, 100 + trial);
      const double before = fit_rate(recs, "latent_loss").slope;
      const double scale = std::pow(10.0, trial % 7 - 3);
      for (auto& r : recs) r.latent_loss *= scale;
      CHECK(fit_rate(recs, "latent_loss").slope == doctest::Approx(before).epsilon(1e-9));
    }
  }
  SUBCASE("nonpositive losses are excluded and counted") {
    auto recs = power_law(1.0, -0.5, ns, 3);
    recs[0].latent_loss = 0.0;
    recs[4].latent_loss = -1.0;
    const RateFit f = fit_rate(recs, "latent_loss");
    CHECK(f.excluded == 2);
    CHECK(f.slope == doctest::Approx(-0.5).epsilon(1e-12));
  }
  SUBCASE("range restriction and errors") {
    const RateFit f = fit_rate(power_law(1.0, -0.5, ns, 1), "latent_loss", 3000);
    CHECK(f.points == 3);
    CHECK_THROWS_AS(fit_rate(power_law(1.0, -0.5, {10, 20}, 3), "latent_loss"), ConfigError);
    CHECK_THROWS_AS(fit_rate(power_law(1.0, -0.5, ns, 3), "bogus"), ConfigError);
  }
  SUBCASE("corrected columns") {
    const auto recs = power_law(1.0, -0.5, ns, 1);
    CHECK(fit_rate(recs, "latent_loss_x_sqrtn").slope == doctest::Approx(0.0).epsilon(1e-9).scale(1.0));
    CHECK(fit_rate(recs, "latent_loss_x_n").slope == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("summaries") {
  std::vector<SweepRecord> recs = power_law(1.0, 0.0, {10, 20}, 1);
  recs.push_back(recs[0]);
  recs.back().latent_loss = 3.0;
  const auto s = summarize(recs, "latent_loss");
  REQUIRE(s.size() == 2);
  CHECK(s[0].n == 10);
  CHECK(s[0].count == 2);
  CHECK(s[0].mean == 2.0);
  CHECK(s[0].sd == doctest::Approx(std::sqrt(2.0)));
  CHECK(s[1].sd == 0.0);
}

TEST_CASE("sweep") {
  SweepConfig cfg;
  cfg.wae = tiny_wae();
  cfg.n_grid = {40, 80};
  cfg.runs = 2;
  cfg.master_seed = 3;
  cfg.record_timing = false;

  SUBCASE("grid shape and seeds") {
    const SweepOutput out = run_sweep(cfg);
    REQUIRE(out.records.size() == 4);
    CHECK(out.failures.empty());
    CHECK(out.records[0].n == 40);
    CHECK(out.records[3].n == 80);
    CHECK(out.records[1].run == 1);
    CHECK(out.records[2].seed == cell_seed(3, 80, 0));
    for (const auto& r : out.records) {
      CHECK(r.latent_loss == r.latent_mmd);
      CHECK(r.seconds == 0.0);
    }
    CHECK(cell_seed(3, 80, 0) != cell_seed(3, 80, 1));
    CHECK(cell_seed(3, 80, 0) != cell_seed(3, 40, 0));
  }
  SUBCASE("a whole-pool cell equals direct training") {
    const Dataset pool = sample_five_gaussian(80, 21);
    cfg.n_grid = {80};
    cfg.runs = 1;
    const SweepOutput out = run_sweep(cfg, pool);
    REQUIRE(out.records.size() == 1);
    WaeConfig w = cfg.wae;
    w.seed = cell_seed(3, 80, 0);
    const TrainResult direct = train_wae(w, pool);
    CHECK(out.records[0].latent_mmd == direct.metrics.back().latent_mmd);
    CHECK(out.records[0].recon_w1 == direct.metrics.back().recon_w1);
  }
  SUBCASE("csv output is byte stable across worker counts") {
    const fs::path a = scratch_dir("sweep_a");
    const fs::path b = scratch_dir("sweep_b");
    cfg.out_dir = a.string();
    cfg.workers = 1;
    const SweepOutput oa = run_sweep(cfg);
    cfg.out_dir = b.string();
    cfg.workers = 2;
    run_sweep(cfg);
    const std::string ca = slurp(a / "sweep.csv");
    CHECK(ca == slurp(b / "sweep.csv"));
    CHECK(ca.rfind("n,run,seed,latent_mmd,", 0) == 0);

    const auto back = read_sweep_csv((a / "sweep.csv").string());
    REQUIRE(back.size() == oa.records.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
      CHECK(back[i].seed == oa.records[i].seed);
      CHECK(back[i].latent_mmd == oa.records[i].latent_mmd);
      CHECK(back[i].recon_w1 == oa.records[i].recon_w1);
    }
  }
  SUBCASE("failures are isolated per cell") {
    Dataset pool = sample_five_gaussian(80, 4);
    pool.x(17, 0) = std::numeric_limits<double>::quiet_NaN();
    cfg.n_grid = {10, 80};
    const SweepOutput out = run_sweep(cfg, pool);
    CHECK(out.records.size() + out.failures.size() == 4);
    std::size_t whole_pool_failures = 0;
    for (const auto& f : out.failures)
      if (f.n == 80) ++whole_pool_failures;
    CHECK(whole_pool_failures == 2);
    for (const auto& r : out.records) CHECK(r.n == 10);
  }
  SUBCASE("validation") {
    SweepConfig bad = cfg;
    bad.n_grid = {80, 40};
    CHECK_THROWS_AS(run_sweep(bad), ConfigError);
    bad = cfg;
    bad.runs = 0;
    CHECK_THROWS_AS(run_sweep(bad), ConfigError);
    bad = cfg;
    bad.pool_size = 50;
    CHECK_THROWS_AS(run_sweep(bad), ConfigError);
  }
}

TEST_CASE("contamination study") {
  ContaminationStudyConfig cfg;
  cfg.wae = tiny_wae();
  cfg.n = 60;
  cfg.master_seed = 8;
  cfg.epsilon_pairs = 500;
  cfg.record_timing = false;
  cfg.cells = {{ContaminationLaw::cauchy, {}, 0.5, 0.0}, {ContaminationLaw::dirichlet, {5, 3, 5}, 0.5, 0.3}};
  const auto out = run_contamination_study(cfg);
  REQUIRE(out.records.size() == 2);
  CHECK(out.failures.empty());

  const auto& clean_cell = out.records[0];
  CHECK(clean_cell.epsilon > 0.0);
  CHECK(clean_cell.recon_w1_clean == clean_cell.recon_w1_contaminated);
  WaeConfig w = cfg.wae;
  w.seed = cell_seed(8, 60, 0);
  const TrainResult direct = train_wae(w, sample_five_gaussian(60, derive_seed(8, "pool", {0})));
  CHECK(clean_cell.latent_mmd == direct.metrics.back().latent_mmd);

  CHECK(out.records[1].epsilon > 0.0);
  CHECK(out.records[1].law == "dirichlet");

  std::ostringstream csv;
  write_contamination_csv(csv, out.records);
  CHECK(csv.str().rfind("law,fraction,level,run,seed,epsilon,", 0) == 0);

  ContaminationStudyConfig bad = cfg;
  bad.cells.clear();
  CHECK_THROWS_AS(run_contamination_study(bad), ConfigError);
}

TEST_CASE("plots") {
  const auto recs = power_law(0.5, -0.5, {100, 400, 1600}, 3, 0.1, 4);

  SUBCASE("summary series") {
    const PlotSeries s = summary_series(recs, "latent_loss");
    REQUIRE(s.x.size() == 3);
    CHECK(s.x[1] == 400.0);
    CHECK(s.err.size() == 3);
    CHECK(s.err[0] > 0.0);
  }
  SUBCASE("corrected series scale the mean") {
    const auto series = corrected_series(recs);
    REQUIRE(series.size() == 2);
    const auto sums = summarize(recs, "latent_loss");
    for (std::size_t i = 0; i < sums.size(); ++i) {
      const double n = static_cast<double>(sums[i].n);
      CHECK(series[0].y[i] == doctest::Approx(sums[i].mean * n).epsilon(1e-12));
      CHECK(series[1].y[i] == doctest::Approx(sums[i].mean * std::sqrt(n)).epsilon(1e-12));
    }
  }
  SUBCASE("single point renders") {
    const std::string svg = render_svg("one", "loss", {PlotSeries{"a", {1000}, {0.1}, {}}});
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
  }
  SUBCASE("deterministic and matches the stored fixture") {
    const fs::path data(DENSIWAE_TEST_DATA_DIR);
    const auto fixture = read_sweep_csv((data / "sweep_fixture.csv").string());
    const fs::path a = scratch_dir("plots_a");
    const auto paths = emit_plots(fixture, "latent_loss", "all", a.string());
    CHECK(paths.size() == 3);
    CHECK(slurp(a / "loss.svg") == slurp(data / "sweep_fixture_loss.svg"));
    const fs::path b = scratch_dir("plots_b");
    emit_plots(fixture, "latent_loss", "all", b.string());
    CHECK(slurp(a / "corrected.svg") == slurp(b / "corrected.svg"));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(emit_plots({}, "latent_loss", "all", scratch_dir("plots_e").string()), ConfigError);
    CHECK_THROWS_AS(emit_plots(recs, "latent_loss", "pie", scratch_dir("plots_e").string()), ConfigError);
  }
}

TEST_CASE("command line exit codes") {
  const fs::path dir = scratch_dir("cli");
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("") != 0);
  CHECK(run_cli("gen-data --out " + dir.string() + " --set n=50") == 0);
  CHECK(fs::exists(dir / "data.csv"));
  CHECK(run_cli("gen-data --out " + dir.string() + " --set no_such_key=1") == 2);
  CHECK(run_cli("train --out " + dir.string() + " --set lambda=-1") == 2);
  CHECK(run_cli("rate-fit --csv /nonexistent.csv") == 2);
  CHECK(run_cli("train --config /nonexistent.cfg") == 2);
  CHECK(run_cli("train --out " + dir.string() + " --set n=60 --set epochs=2 --set batch_size=30 --set recon_eval_cap=30") ==
        0);
  CHECK(fs::exists(dir / "metrics.csv"));
  CHECK(fs::exists(dir / "encoder.bin"));
}
