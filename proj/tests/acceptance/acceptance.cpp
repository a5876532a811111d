// Acceptance checks. Prints one PASS/FAIL line per criterion.
//
// Usage: acceptance [criterion numbers...]   (default: all of 1..13)
// Environment:
//   DENSIWAE_WORKERS     threads for the sweeps (default: hardware concurrency)
//   DENSIWAE_MNIST_DIR   directory holding train-images-idx3-ubyte
//   DENSIWAE_ACCEPT_OUT  directory for sweep CSVs and plots (default: acceptance_out)
//   DENSIWAE_ACCEPT_REUSE=1 reuses sweep CSVs found in the output directory

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "densiwae/autodiff/tape.hpp"
#include "densiwae/data/dataset.hpp"
#include "densiwae/divergences/kernels.hpp"
#include "densiwae/divergences/mmd.hpp"
#include "densiwae/divergences/transport.hpp"
#include "densiwae/error.hpp"
#include "densiwae/experiments/config.hpp"
#include "densiwae/experiments/plots.hpp"
#include "densiwae/experiments/setup.hpp"
#include "densiwae/experiments/sweep.hpp"
#include "densiwae/kde/kde.hpp"
#include "densiwae/networks/linear_map.hpp"
#include "densiwae/networks/mlp.hpp"
#include "densiwae/stats/regression.hpp"
#include "densiwae/stats/two_sample.hpp"
#include "densiwae/training/wae.hpp"

using namespace densiwae;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::size_t workers() {
  if (const char* w = std::getenv("DENSIWAE_WORKERS")) return std::max(1, std::atoi(w));
  return std::max(1u, std::thread::hardware_concurrency());
}

fs::path out_dir() {
  const char* d = std::getenv("DENSIWAE_ACCEPT_OUT");
  return d ? fs::path(d) : fs::path("acceptance_out");
}

bool reuse() {
  const char* r = std::getenv("DENSIWAE_ACCEPT_REUSE");
  return r && std::string(r) == "1";
}

Tensor normal_rows(std::size_t n, std::size_t d, std::mt19937_64& rng, double mean = 0.0) {
  std::normal_distribution<double> g(mean, 1.0);
  Tensor t = Tensor::matrix(n, d);
  for (auto& v : t.values()) v = g(rng);
  return t;
}

double euclid(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// ---------------------------------------------------------------- criterion 1

double brute_force_w1(const Tensor& x, const Tensor& y) {
  std::vector<std::size_t> perm(x.rows());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) c += euclid(x.row(i), y.row(perm[i]));
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(x.rows());
}

double naive_gauss(std::span<const double> a, std::span<const double> b, double sigma) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::exp(-s / (2 * sigma * sigma));
}

Outcome criterion1() {
  std::mt19937_64 rng(1001);
  double w1_err = 0.0, mmd_err = 0.0, cramer_err = 0.0;
  for (int seed = 0; seed < 100; ++seed) {
    const std::size_t n = 1 + seed % 7, d = 1 + seed % 3;
    const Tensor x = normal_rows(n, d, rng), y = normal_rows(n, d, rng, 0.5);
    w1_err = std::max(w1_err, std::abs(w1_exact(x, y) - brute_force_w1(x, y)));
  }
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 5 + t % 9, m = 5 + t % 5, d = 1 + t % 3;
    const double sigma = 0.5 + 0.1 * t;
    const Tensor x = normal_rows(n, d, rng), y = normal_rows(m, d, rng, 0.3);
    double kxx = 0, kyy = 0, kxy = 0, kxx_off = 0, kyy_off = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double v = naive_gauss(x.row(i), x.row(j), sigma);
        kxx += v;
        if (i != j) kxx_off += v;
      }
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        const double v = naive_gauss(y.row(i), y.row(j), sigma);
        kyy += v;
        if (i != j) kyy_off += v;
      }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) kxy += naive_gauss(x.row(i), y.row(j), sigma);
    const double dn = static_cast<double>(n), dm = static_cast<double>(m);
    const double biased = std::sqrt(std::max(0.0, kxx / (dn * dn) + kyy / (dm * dm) - 2 * kxy / (dn * dm)));
    const double unbiased = kxx_off / (dn * (dn - 1)) + kyy_off / (dm * (dm - 1)) - 2 * kxy / (dn * dm);
    const KernelSpec k = KernelSpec::gaussian(sigma);
    mmd_err = std::max({mmd_err, std::abs(mmd_biased(x, y, k) - biased), std::abs(mmd_sq_unbiased(x, y, k) - unbiased)});

    auto mean_half_dist = [](const Tensor& a, const Tensor& b) {
      double s = 0.0;
      for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.rows(); ++j) s += 0.5 * euclid(a.row(i), b.row(j));
      return s / static_cast<double>(a.rows() * b.rows());
    };
    const double energy =
        dn * dm / (dn + dm) * (2 * mean_half_dist(x, y) - mean_half_dist(x, x) - mean_half_dist(y, y));
    cramer_err = std::max(cramer_err, std::abs(cramer_statistic(x, y) - energy));
  }
  const bool pass = w1_err <= 1e-9 && mmd_err <= 1e-12 && cramer_err <= 1e-12;
  return {pass, "max |w1 - brute| = " + fmt("%.2e", w1_err) + ", max |mmd - naive| = " + fmt("%.2e", mmd_err) +
                    ", max |T - energy| = " + fmt("%.2e", cramer_err)};
}

// ---------------------------------------------------------------- criterion 2

double net_gradient_error(const Mlp& net, const Tensor& x, const Tensor& weights) {
  std::vector<Tensor> analytic;
  Tensor dx;
  {
    Tape tape;
    const MlpBinding b = bind(tape, net);
    const Var xv = tape.parameter(x);
    const Var out = forward(tape, net, b, xv);
    const Var loss = tape.sum(tape.mul(out, tape.constant(weights)));
    tape.backward(loss);
    analytic = b.gradients(tape);
    dx = tape.grad(xv);
  }
  auto value = [&](const Mlp& m, const Tensor& in) {
    const Tensor o = forward(m, in);
    double s = 0.0;
    for (std::size_t i = 0; i < o.size(); ++i) s += o[i] * weights[i];
    return s;
  };
  const double h = 1e-5;
  double worst = 0.0, scale = 1e-8;
  auto record = [&](double numeric, double exact) {
    worst = std::max(worst, std::abs(numeric - exact));
    scale = std::max({scale, std::abs(numeric), std::abs(exact)});
  };
  Mlp probe = net;
  const auto params = probe.parameters();
  for (std::size_t k = 0; k < params.size(); ++k)
    for (std::size_t i = 0; i < params[k]->size(); ++i) {
      const double keep = (*params[k])[i];
      (*params[k])[i] = keep + h;
      const double up = value(probe, x);
      (*params[k])[i] = keep - h;
      const double down = value(probe, x);
      (*params[k])[i] = keep;
      record((up - down) / (2 * h), analytic[k][i]);
    }
  Tensor xp = x;
  for (std::size_t i = 0; i < xp.size(); ++i) {
    const double keep = xp[i];
    xp[i] = keep + h;
    const double up = value(net, xp);
    xp[i] = keep - h;
    const double down = value(net, xp);
    xp[i] = keep;
    record((up - down) / (2 * h), dx[i]);
  }
  return worst / scale;
}

double objective_gradient_error(const WaeState& state, const WaeConfig& config, const Tensor& batch,
                                const Tensor& prior) {
  std::vector<Tensor> analytic;
  {
    Tape tape;
    const ObjectiveVars o = wae_objective(tape, state, config, batch, prior);
    tape.backward(o.total);
    analytic = o.encoder.gradients(tape);
    for (auto& g : o.decoder.gradients(tape)) analytic.push_back(std::move(g));
  }
  WaeState probe = state;
  std::vector<Tensor*> params = probe.encoder.parameters();
  for (auto* p : probe.decoder.parameters()) params.push_back(p);
  auto value = [&] {
    Tape tape;
    return tape.value(wae_objective(tape, probe, config, batch, prior).total).item();
  };
  const double h = 1e-5;
  double worst = 0.0, scale = 1e-8;
  for (std::size_t k = 0; k < params.size(); ++k)
    for (std::size_t i = 0; i < params[k]->size(); ++i) {
      const double keep = (*params[k])[i];
      (*params[k])[i] = keep + h;
      const double up = value();
      (*params[k])[i] = keep - h;
      const double down = value();
      (*params[k])[i] = keep;
      const double numeric = (up - down) / (2 * h);
      worst = std::max(worst, std::abs(numeric - analytic[k][i]));
      scale = std::max({scale, std::abs(numeric), std::abs(analytic[k][i])});
    }
  return worst / scale;
}

Outcome criterion2() {
  std::mt19937_64 rng(2002);
  std::uniform_int_distribution<int> width(2, 6), depth(1, 3), pick(0, 3);
  const Activation acts[] = {Activation::tanh, Activation::sigmoid, Activation::linear, Activation::groupsort};
  const OutputTransform outs[] = {OutputTransform::identity, OutputTransform::affine_rescale, OutputTransform::softplus};
  double worst_net = 0.0, worst_obj = 0.0;
  int configs = 0;
  for (int t = 0; t < 12; ++t, ++configs) {
    std::vector<std::size_t> widths{static_cast<std::size_t>(width(rng))};
    const int layers = depth(rng);
    const Activation act = acts[pick(rng)];
    for (int l = 0; l < layers; ++l) widths.push_back(act == Activation::groupsort ? 4 : width(rng));
    widths.push_back(static_cast<std::size_t>(width(rng)));
    MlpSpec spec = MlpSpec::uniform(widths, {act, 2}, outs[t % 3]);
    const Mlp net = build_mlp(spec, 100 + t);
    const Tensor x = normal_rows(5, widths.front(), rng);
    std::uniform_real_distribution<double> u(-1, 1);
    Tensor w = Tensor::matrix(5, widths.back());
    for (auto& v : w.values()) v = u(rng);
    worst_net = std::max(worst_net, net_gradient_error(net, x, w));
  }
  for (int t = 0; t < 10; ++t, ++configs) {
    const std::size_t k = 1 + t % 3, d = 2 + t % 3;
    WaeConfig c;
    c.latent = latent_law_from_string(t % 2 == 0 ? "gaussian" : "beta", k);
    c.lambda = 0.1 + 0.3 * t;
    c.kernel = KernelSpec::gaussian(0.5 + 0.25 * t);
    const HiddenActivation act{t % 2 == 0 ? Activation::tanh : Activation::sigmoid, 2};
    c.encoder = MlpSpec::uniform({d, 5, k}, act, output_for_latent(c.latent));
    c.decoder = MlpSpec::uniform({k, 5, d}, act);
    c.seed = 300 + t;
    const WaeState s = init_wae(c);
    const std::size_t b = 6 + t;
    const Tensor batch = normal_rows(b, d, rng);
    Rng prng = make_rng(400 + t);
    const Tensor prior = sample_latent_rows(c.latent, b, prng);
    worst_obj = std::max(worst_obj, objective_gradient_error(s, c, batch, prior));
  }
  const bool pass = configs >= 20 && worst_net < 1e-4 && worst_obj < 1e-4;
  return {pass, std::to_string(configs) + " configurations; worst relative error nets " + fmt("%.2e", worst_net) +
                    ", WAE-MMD objective " + fmt("%.2e", worst_obj)};
}

// ---------------------------------------------------------------- criterion 3

Outcome criterion3() {
  WaeConfig c = five_gaussian_config(latent_law_from_string("gaussian", 2), DivergenceKind::mmd, 0.2);
  c.seed = 33;
  const WaeState s = init_wae(c);
  const Dataset data = sample_five_gaussian(500, 34);
  Rng rng = make_rng(35);
  const Tensor prior = sample_latent_rows(c.latent, 500, rng);
  const Tensor quarter = Tensor::from_rows({{0.0, -1.0}, {1.0, 0.0}});
  const ConjugationResult r = conjugation_check(s, quarter, data.x, prior, c.kernel, c.lambda);
  const double gap = std::abs(r.loss_original - r.loss_conjugated);
  const bool pass = gap <= 1e-9 && r.recon_bitwise_equal;
  return {pass, "|loss gap| = " + fmt("%.2e", gap) + ", reconstructions bit-identical: " +
                    (r.recon_bitwise_equal ? "yes" : "no")};
}

// ------------------------------------------------------------ criteria 4-6

std::vector<SweepRecord> sweep_records(DivergenceKind kind, double lambda, const std::string& name) {
  const fs::path dir = out_dir() / name;
  const fs::path csv = dir / "sweep.csv";
  if (reuse() && fs::exists(csv)) return read_sweep_csv(csv.string());
  SweepConfig s;
  s.wae = five_gaussian_config(latent_law_from_string("gaussian", 2), kind, lambda);
  s.wae.epochs = 200;
  s.n_grid = {1000, 2000, 4000, 8000};
  s.runs = 5;
  s.master_seed = kind == DivergenceKind::gan ? 505 : 404;
  s.workers = workers();
  s.out_dir = dir.string();
  s.record_timing = true;
  const SweepOutput out = run_sweep(s);
  for (const auto& f : out.failures)
    std::printf("  cell n=%zu run=%zu failed: %s\n", f.n, f.run, f.error.c_str());
  if (!out.records.empty()) emit_plots(out.records, "latent_loss", "all", dir.string());
  return out.records;
}

const std::vector<SweepRecord>& mmd_sweep() {
  static std::optional<std::vector<SweepRecord>> cache;
  if (!cache) cache = sweep_records(DivergenceKind::mmd, 0.2, "mmd_sweep");
  return *cache;
}

std::string series(const std::vector<NSummary>& s, const char* f) {
  std::string out;
  for (const auto& v : s) out += (out.empty() ? "" : " ") + fmt(f, v.mean);
  return out;
}

Outcome criterion4() {
  const auto& recs = mmd_sweep();
  if (recs.size() != 20) return {false, "sweep produced " + std::to_string(recs.size()) + " of 20 cells"};
  const RateFit fit = fit_rate(recs, "latent_mmd");
  const auto corrected = summarize(recs, "latent_loss_x_sqrtn");
  const double ratio = corrected.back().mean / corrected.front().mean;
  const bool pass = fit.slope >= -0.70 && fit.slope <= -0.30 && ratio >= 0.5 && ratio <= 2.0;
  return {pass, "slope " + fmt("%.3f", fit.slope) + " (se " + fmt("%.3f", fit.slope_se) + "), mean MMD [" +
                    series(summarize(recs, "latent_mmd"), "%.4f") + "], sqrt(n)-corrected last/first " +
                    fmt("%.3f", ratio)};
}

Outcome criterion5() {
  const auto recs = sweep_records(DivergenceKind::gan, 0.2, "gan_sweep");
  if (recs.size() != 20) return {false, "sweep produced " + std::to_string(recs.size()) + " of 20 cells"};
  const auto js = summarize(recs, "latent_js");
  std::vector<double> ns, means;
  for (const auto& s : js) {
    ns.push_back(static_cast<double>(s.n));
    means.push_back(s.mean);
  }
  const double rho = spearman(ns, means);
  const bool pass = rho <= -0.8 && js.back().sd < js.front().sd;
  return {pass, "mean JS [" + series(js, "%.4f") + "], Spearman " + fmt("%.2f", rho) + ", sd at n=" +
                    std::to_string(js.front().n) + " " + fmt("%.4f", js.front().sd) + " vs n=" +
                    std::to_string(js.back().n) + " " + fmt("%.4f", js.back().sd)};
}

Outcome criterion6() {
  const auto& recs = mmd_sweep();
  if (recs.size() != 20) return {false, "sweep produced " + std::to_string(recs.size()) + " of 20 cells"};
  const auto w1 = summarize(recs, "recon_w1");
  const auto tv = summarize(recs, "latent_tv");
  std::vector<double> ns, means;
  for (const auto& s : w1) {
    ns.push_back(static_cast<double>(s.n));
    means.push_back(s.mean);
  }
  const double rho = spearman(ns, means);
  const double threshold = 3.0 * tv.back().mean;
  const bool pass = rho <= -0.8 && w1.back().mean < threshold;
  return {pass, "mean recon W1 [" + series(w1, "%.4f") + "], Spearman " + fmt("%.2f", rho) + ", final " +
                    fmt("%.4f", w1.back().mean) + " vs 3 t = " + fmt("%.4f", threshold) + " (t = latent TV)"};
}

// ---------------------------------------------------------------- criterion 7

Outcome criterion7() {
  const Dataset data = sample_five_gaussian(8000, 707);
  const Dataset fresh = sample_five_gaussian(500, 708);
  std::string detail;
  bool pass = true;
  for (const std::string law : {"gaussian", "exponential"}) {
    WaeConfig c = five_gaussian_config(latent_law_from_string(law, 2), DivergenceKind::mmd, 0.8);
    c.epochs = 200;
    c.seed = 709;
    const TrainResult r = train_wae(c, data);
    const Tensor z = forward(r.state.encoder, fresh.x);
    Rng rng = make_rng(710);
    const Tensor prior = sample_latent_rows(c.latent, 500, rng);
    const TestResult ff = ff_test(z, prior, 999, 711);
    const TestResult mc = cramer_test(z, prior, CramerMethod::monte_carlo, 999, 712);
    const TestResult ev = cramer_test(z, prior, CramerMethod::eigenvalue, 9999, 713);
    const bool reject = ff.p_value < 0.05 && mc.p_value < 0.05 && ev.p_value < 0.05;
    pass = pass && reject;
    detail += (detail.empty() ? "" : "; ") + law + ": FF p " + fmt("%.4f", ff.p_value) + ", Cramer MC p " +
              fmt("%.4f", mc.p_value) + ", eigen p " + fmt("%.4f", ev.p_value);
  }
  return {pass, detail};
}

// ---------------------------------------------------------------- criterion 8

Outcome criterion8() {
  const int sims = 200;
  int ff_rej = 0, mc_rej = 0, ev_rej = 0;
  for (int s = 0; s < sims; ++s) {
    std::mt19937_64 rng(8000 + s);
    const Tensor x = normal_rows(200, 2, rng), y = normal_rows(200, 2, rng);
    ff_rej += ff_test(x, y, 199, 9000 + s).p_value <= 0.05;
    mc_rej += cramer_test(x, y, CramerMethod::monte_carlo, 199, 10000 + s).p_value <= 0.05;
    ev_rej += cramer_test(x, y, CramerMethod::eigenvalue, 999, 11000 + s).p_value <= 0.05;
  }
  auto rate = [&](int r) { return static_cast<double>(r) / sims; };
  auto ok = [&](int r) { return rate(r) >= 0.02 && rate(r) <= 0.10; };
  const bool pass = ok(ff_rej) && ok(mc_rej) && ok(ev_rej);
  return {pass, "rejection rates FF " + fmt("%.3f", rate(ff_rej)) + ", Cramer MC " + fmt("%.3f", rate(mc_rej)) +
                    ", Cramer eigen " + fmt("%.3f", rate(ev_rej)) + " over 200 null simulations"};
}

// ---------------------------------------------------------------- criterion 9

Outcome criterion9() {
  RobustKdeConfig clean;
  clean.seed = 909;
  const RobustKdeTable a = robust_kde_experiment(clean);
  RobustKdeConfig dirty = clean;
  dirty.law = ContaminationLaw::cauchy;
  dirty.level = 0.2;
  dirty.fraction = 0.5;
  const RobustKdeTable b = robust_kde_experiment(dirty);
  const bool pass = std::abs(a.full_fit.slope + 0.4) <= 0.15 && b.top_fit.slope > -0.1;
  return {pass, "clean slope " + fmt("%.3f", a.full_fit.slope) + ", contaminated top-half slope " +
                    fmt("%.3f", b.top_fit.slope) + " (epsilon " + fmt("%.4f", b.epsilon) + ")"};
}

// --------------------------------------------------------------- criterion 10

Outcome criterion10() {
  const std::size_t n = 200, reps = 100;
  const KernelSpec k = KernelSpec::gaussian(1.0);
  const FiniteGroup c4 = FiniteGroup::cyclic(4);
  std::mt19937_64 rng(1010);
  const MmdReference ref(normal_rows(50 * n, 2, rng), k);
  double plain = 0.0, sym = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    const Tensor x = normal_rows(n, 2, rng);
    plain += ref.mmd_biased(x) / static_cast<double>(reps);
    sym += ref.mmd_biased(symmetrize(x, c4)) / static_cast<double>(reps);
  }
  const double varsigma = estimate_varsigma(k, c4, 2000, 1011);
  const double g = static_cast<double>(c4.order());
  const double bound = 2.0 * std::sqrt(2.0 * k.bound() * (1.0 + varsigma * (g - 1.0)) / (static_cast<double>(n) * g));
  const bool pass = sym <= plain && plain < bound && sym < bound;
  return {pass, "mean MMD plain " + fmt("%.4f", plain) + ", symmetrized " + fmt("%.4f", sym) + ", bound " +
                    fmt("%.4f", bound) + " (varsigma " + fmt("%.4f", varsigma) + ")"};
}

// --------------------------------------------------------------- criterion 11

Outcome criterion11() {
  std::mt19937_64 rng(1111);
  std::uniform_int_distribution<std::size_t> count(1, 50);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const std::size_t d = 2 + t % 2;
    const Tensor atoms = normal_rows(count(rng), d, rng);
    const MemorizingDecoder dec = build_memorizing_decoder(atoms, 2, 0.05, 1200 + t);
    worst = std::max(worst, w1_exact(decode(dec, dec.reference), atoms));
  }
  return {worst <= 0.05, "worst push-forward W1 " + fmt("%.2e", worst) + " over 20 atom sets (eps 0.05)"};
}

// --------------------------------------------------------------- criterion 12

Outcome criterion12() {
  std::mt19937_64 rng(1212);
  std::uniform_int_distribution<std::size_t> size(3, 40);
  std::uniform_real_distribution<double> shift(-2, 2), bw(0.05, 1.0);
  double worst_margin = -std::numeric_limits<double>::infinity();
  bool all = true;
  for (int t = 0; t < 50; ++t) {
    std::normal_distribution<double> gp(0.0, 1.0), gq(shift(rng), 0.5 + std::abs(shift(rng)));
    std::vector<double> p(size(rng)), q(size(rng));
    for (auto& v : p) v = gp(rng);
    for (auto& v : q) v = gq(rng);
    const double h = bw(rng);
    const SmoothedTvCheck c = smoothed_tv_bound_check(p, q, DensityKernel::gaussian, h);
    const bool holds = c.lhs <= c.rhs + 1e-3;
    all = all && holds && c.holds;
    worst_margin = std::max(worst_margin, c.lhs - c.rhs);
  }
  return {all, "50 instances; max (lhs - rhs) " + fmt("%.2e", worst_margin)};
}

// --------------------------------------------------------------- criterion 13

Outcome criterion13() {
  const char* dir = std::getenv("DENSIWAE_MNIST_DIR");
  const std::string mnist = dir ? dir : "data/mnist";
  if (!fs::exists(fs::path(mnist) / "train-images-idx3-ubyte"))
    return {false, "MNIST IDX files not found in " + mnist};
  KeyValueConfig kv;
  kv.set("dataset", "mnist");
  kv.set("mnist_dir", mnist);
  kv.set("mnist_subset", "4000");
  kv.set("epochs", "50");
  const Dataset data = load_dataset(kv, 1313);
  WaeConfig c = wae_config_from(kv, 1313);
  const TrainResult r = train_wae(c, data);
  bool finite = true;
  for (double v : r.state.loss_trace) finite = finite && std::isfinite(v);
  const MetricRecord& first = r.metrics.front();
  const MetricRecord& last = r.metrics.back();
  const bool pass = finite && data.n() == 4000 && last.epoch == 50 && last.latent_mmd < first.latent_mmd &&
                    last.recon_w1 < first.recon_w1;
  return {pass, std::to_string(data.n()) + " images; latent MMD " + fmt("%.4f", first.latent_mmd) + " -> " +
                    fmt("%.4f", last.latent_mmd) + ", recon W1 " + fmt("%.3f", first.recon_w1) + " -> " +
                    fmt("%.3f", last.recon_w1) + (finite ? "" : ", non-finite loss")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<const char*, std::function<Outcome()>>> criteria{
      {1, {"oracle equivalences", criterion1}},
      {2, {"gradient validity", criterion2}},
      {3, {"conjugation invariance", criterion3}},
      {4, {"MMD convergence rate", criterion4}},
      {5, {"JS sweep trend", criterion5}},
      {6, {"reconstruction trend", criterion6}},
      {7, {"two-sample tests reject", criterion7}},
      {8, {"test calibration", criterion8}},
      {9, {"robust KDE rates", criterion9}},
      {10, {"symmetrization improvement", criterion10}},
      {11, {"memorizing decoder", criterion11}},
      {12, {"smoothed TV inequality", criterion12}},
      {13, {"MNIST smoke run", criterion13}},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  if (selected.empty())
    for (const auto& [id, _] : criteria) selected.insert(id);

  int failed = 0;
  for (int id : selected) {
    const auto it = criteria.find(id);
    if (it == criteria.end()) {
      std::printf("unknown criterion %d\n", id);
      return 2;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it->second.second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d %-28s %s  %s [%.1f s]\n", id, it->second.first, o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%zu criteria, %d failed\n", selected.size(), failed);
  return failed == 0 ? 0 : 1;
}
