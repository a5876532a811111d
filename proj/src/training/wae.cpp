#include "densiwae/training/wae.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>

#include "densiwae/divergences/histogram.hpp"
#include "densiwae/divergences/mmd.hpp"
#include "densiwae/divergences/transport.hpp"
#include "densiwae/error.hpp"
#include "densiwae/networks/architectures.hpp"

namespace densiwae {

namespace {

constexpr double kSqrtFloor = 1e-12;

std::vector<Tensor*> ae_parameters(WaeState& s) {
  auto p = s.encoder.parameters();
  for (auto* t : s.decoder.parameters()) p.push_back(t);
  return p;
}

Tensor subsample_rows(const Tensor& x, std::size_t cap, std::uint64_t seed) {
  if (x.rows() <= cap) return x;
  Rng rng = make_rng(seed);
  auto idx = sample_without_replacement(x.rows(), cap, rng);
  std::sort(idx.begin(), idx.end());
  return x.select_rows(idx);
}

double mean_row_distance(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) s += distance(a.row(i), b.row(i));
  return s / static_cast<double>(a.rows());
}

Var gaussian_mmd_surrogate(Tape& tape, Var z, const Tensor& prior, double sigma) {
  const double c = -1.0 / (2.0 * sigma * sigma);
  const Var p = tape.constant(prior);
  const KernelSpec k = KernelSpec::gaussian(sigma);
  const double m = static_cast<double>(prior.rows());
  const double kpp = kernel_sum(k, prior, prior) / (m * m);
  const Var kzz = tape.mean(tape.exp(tape.scale(tape.pairwise_sqdist(z, z), c)));
  const Var kzp = tape.mean(tape.exp(tape.scale(tape.pairwise_sqdist(z, p), c)));
  const Var mmd2 = tape.add_scalar(tape.sub(kzz, tape.scale(kzp, 2.0)), kpp + kSqrtFloor);
  return tape.sqrt(tape.relu(mmd2));
}

}  // namespace

void WaeConfig::validate(std::size_t data_dim) const {
  if (!(lambda >= 0)) throw ConfigError("lambda must be >= 0");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 2) throw ConfigError("batch size must be >= 2");
  if (latent_eval_cap < 2 || recon_eval_cap < 1) throw ConfigError("evaluation caps too small");
  if (!(tolerance >= 0)) throw ConfigError("tolerance t must be >= 0");
  latent.validate();
  encoder.validate();
  decoder.validate();
  if (encoder.input_width() != data_dim)
    throw ShapeError("encoder input width " + std::to_string(encoder.input_width()) + " but data dimension is " +
                     std::to_string(data_dim));
  if (decoder.output_width() != data_dim)
    throw ShapeError("decoder output width " + std::to_string(decoder.output_width()) + " but data dimension is " +
                     std::to_string(data_dim));
  if (encoder.output_width() != latent.k || decoder.input_width() != latent.k)
    throw ShapeError("encoder output and decoder input must equal the latent dimension " + std::to_string(latent.k));
  if (divergence == DivergenceKind::mmd && kernel.kind != KernelKind::gaussian)
    throw ConfigError("training supports the gaussian kernel only; got " + kernel.describe());
}

OutputTransform output_for_latent(const LatentLawSpec& latent) {
  switch (latent.kind) {
    case LatentKind::gaussian: return OutputTransform::identity;
    case LatentKind::beta_marginals: return OutputTransform::affine_rescale;
    case LatentKind::exp_marginals: return OutputTransform::softplus;
  }
  return OutputTransform::identity;
}

WaeConfig five_gaussian_config(const LatentLawSpec& latent, DivergenceKind div, double lambda, HiddenActivation act) {
  WaeConfig c;
  c.latent = latent;
  c.divergence = div;
  c.lambda = lambda;
  c.encoder = five_gaussian_encoder_spec(latent.k, act, output_for_latent(latent), 0.0, 1.0);
  c.decoder = five_gaussian_decoder_spec(latent.k, act);
  return c;
}

WaeState init_wae(const WaeConfig& config) {
  WaeState s;
  s.encoder = build_encoder(config.encoder, derive_seed(config.seed, "encoder"));
  s.decoder = build_mlp(config.decoder, derive_seed(config.seed, "decoder"));
  s.ae_optimizer = make_optimizer(config.optimizer, ae_parameters(s));
  if (config.divergence == DivergenceKind::gan) {
    s.discriminator = build_mlp(discriminator_spec(config.latent.k), derive_seed(config.seed, "discriminator"));
    s.disc_optimizer = make_optimizer(config.optimizer, s.discriminator->parameters());
  }
  return s;
}

ObjectiveVars wae_objective(Tape& tape, const WaeState& state, const WaeConfig& config, const Tensor& batch,
                            const Tensor& prior_batch) {
  ObjectiveVars o;
  o.encoder = bind(tape, state.encoder);
  o.decoder = bind(tape, state.decoder);
  const Var x = tape.constant(batch);
  const Var z = forward(tape, state.encoder, o.encoder, x);
  const Var xhat = forward(tape, state.decoder, o.decoder, z);
  o.recon = tape.mean(tape.row_norms(tape.sub(x, xhat)));
  if (config.lambda == 0.0) {
    o.latent = tape.constant(Tensor::scalar(0.0));
    o.total = o.recon;
    return o;
  }
  if (config.divergence == DivergenceKind::mmd) {
    o.latent = gaussian_mmd_surrogate(tape, z, prior_batch, config.kernel.sigma);
  } else {
    if (!state.discriminator) throw ConfigError("adversarial objective needs a discriminator");
    const MlpBinding d = bind(tape, *state.discriminator, false);
    const Var logits = forward(tape, *state.discriminator, d, z);
    o.latent = tape.mean(tape.softplus(tape.scale(logits, -1.0)));
  }
  o.total = tape.add(o.recon, tape.scale(o.latent, config.lambda));
  return o;
}

namespace {

void discriminator_step(WaeState& s, const Tensor& batch, const Tensor& prior) {
  const Tensor z = forward(s.encoder, batch);
  Tape tape;
  const MlpBinding d = bind(tape, *s.discriminator);
  const Var real = forward(tape, *s.discriminator, d, tape.constant(prior));
  const Var fake = forward(tape, *s.discriminator, d, tape.constant(z));
  const Var loss = tape.add(tape.mean(tape.softplus(tape.scale(real, -1.0))), tape.mean(tape.softplus(fake)));
  if (!std::isfinite(tape.value(loss).item())) throw NumericalError("discriminator loss is not finite");
  tape.backward(loss);
  const auto grads = d.gradients(tape);
  const auto params = s.discriminator->parameters();
  step(params, grads, *s.disc_optimizer);
}

}  // namespace

TrainResult train_wae(const WaeConfig& config, const Dataset& data) {
  config.validate(data.d());
  if (data.n() < 2) throw ConfigError("training needs at least two rows");
  const auto start = std::chrono::steady_clock::now();
  TrainResult out;
  WaeState& s = out.state;
  s = init_wae(config);
  const std::uint64_t eval_seed = derive_seed(config.seed, "eval");
  Rng prior_rng = make_rng(derive_seed(config.seed, "prior"));
  const std::size_t n = data.n();
  const std::size_t bs = std::min(config.batch_size, n);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng shuffle = make_rng(derive_seed(config.seed, "shuffle", {epoch}));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), shuffle);
    double epoch_loss = 0.0;
    std::size_t steps = 0;
    for (std::size_t b = 0; b + 1 < n; b += bs) {
      const std::size_t e = std::min(n, b + bs);
      if (e - b < 2) break;
      const Tensor batch = data.x.select_rows(std::span<const std::size_t>(order).subspan(b, e - b));
      Tensor prior;
      if (config.lambda > 0) prior = sample_latent_rows(config.latent, e - b, prior_rng);
      if (s.discriminator && config.lambda > 0) discriminator_step(s, batch, prior);

      Tape tape;
      const ObjectiveVars obj = wae_objective(tape, s, config, batch, prior);
      const double value = tape.value(obj.total).item();
      if (!std::isfinite(value))
        throw NumericalError("training objective is not finite at epoch " + std::to_string(epoch) + ", step " +
                             std::to_string(steps + 1));
      tape.backward(obj.total);
      auto grads = obj.encoder.gradients(tape);
      for (auto& g : obj.decoder.gradients(tape)) grads.push_back(std::move(g));
      step(ae_parameters(s), grads, s.ae_optimizer);
      epoch_loss += value;
      ++steps;
    }
    s.epoch = epoch;
    s.loss_trace.push_back(epoch_loss / static_cast<double>(std::max<std::size_t>(steps, 1)));
    const bool due = epoch == 1 || epoch == config.epochs ||
                     (config.eval_interval > 0 && epoch % config.eval_interval == 0);
    if (due) {
      MetricRecord r = evaluate(s, data, config, eval_seed);
      r.epoch = epoch;
      r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      out.metrics.push_back(r);
    }
  }
  return out;
}

MetricRecord latent_metrics(const Tensor& encoded, const Tensor& prior, const WaeConfig& config) {
  MetricRecord r;
  r.latent_mmd = mmd_biased(encoded, prior, config.kernel);
  const auto pd = plugin_divergences(encoded, prior, config.hist_bins);
  r.latent_js = pd.js;
  r.latent_tv = pd.tv;
  return r;
}

MetricRecord evaluate(const WaeState& state, const Dataset& data, const WaeConfig& config, std::uint64_t eval_seed) {
  const Tensor xs = subsample_rows(data.x, config.latent_eval_cap, derive_seed(eval_seed, "latent-rows"));
  const Tensor z = forward(state.encoder, xs);
  Rng rng = make_rng(derive_seed(eval_seed, "prior"));
  const Tensor prior = sample_latent_rows(config.latent, xs.rows(), rng);
  MetricRecord r = latent_metrics(z, prior, config);

  const Tensor xhat = forward(state.decoder, z);
  double se = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) se += (xs[i] - xhat[i]) * (xs[i] - xhat[i]);
  r.recon_mse = se / static_cast<double>(xs.size());

  const Tensor xr = subsample_rows(data.x, config.recon_eval_cap, derive_seed(eval_seed, "recon-rows"));
  r.recon_subsampled = xr.rows() != data.n();
  r.recon_w1 = w1_exact(xr, forward(state.decoder, forward(state.encoder, xr)));
  if (!std::isfinite(r.latent_mmd) || !std::isfinite(r.recon_w1) || !std::isfinite(r.recon_mse))
    throw NumericalError("evaluation produced non-finite metrics");
  return r;
}

ConjugationResult conjugation_check(const WaeState& state, const Tensor& rotation, const Tensor& eval_data,
                                    const Tensor& prior_draw, const KernelSpec& kernel, double lambda) {
  const std::size_t k = state.encoder.spec.output_width();
  if (rotation.rows() != k || rotation.cols() != k)
    throw ShapeError("conjugation check: rotation must be " + std::to_string(k) + " x " + std::to_string(k));
  const Tensor rtr = matmul_at(rotation, rotation);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      if (std::abs(rtr(i, j) - (i == j ? 1.0 : 0.0)) >= 1e-10) throw ConfigError("conjugation check: matrix is not orthogonal");
  if (prior_draw.cols() != k) throw ShapeError("conjugation check: prior draw has wrong dimension");

  // Row convention: phi(z) = z R^T, phi^{-1}(z) = z R.
  const Tensor z = forward(state.encoder, eval_data);
  const Tensor z_conj = matmul(z, rotation);
  const Tensor xhat = forward(state.decoder, z);
  const Tensor xhat_conj = forward(state.decoder, matmul_bt(z_conj, rotation));

  ConjugationResult r;
  r.recon_original = mean_row_distance(eval_data, xhat);
  r.recon_conjugated = mean_row_distance(eval_data, xhat_conj);
  r.recon_bitwise_equal = xhat == xhat_conj;
  r.latent_original = mmd_biased(z, prior_draw, kernel);
  r.latent_conjugated = mmd_biased(z_conj, matmul(prior_draw, rotation), kernel);
  r.loss_original = r.recon_original + lambda * r.latent_original;
  r.loss_conjugated = r.recon_conjugated + lambda * r.latent_conjugated;
  return r;
}

bool check_constraint(const MetricRecord& record, double t, ConstraintMetric metric) {
  if (!(t >= 0)) throw ConfigError("constraint tolerance t must be >= 0");
  const double v = metric == ConstraintMetric::mmd ? record.latent_mmd
                   : metric == ConstraintMetric::js ? record.latent_js
                                                     : record.latent_tv;
  return v <= t;
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricRecord>& metrics) {
  out << "epoch,latent_mmd,latent_js,latent_tv,recon_w1,recon_mse,seconds\n";
  out.precision(17);
  for (const auto& m : metrics)
    out << m.epoch << ',' << m.latent_mmd << ',' << m.latent_js << ',' << m.latent_tv << ',' << m.recon_w1 << ','
        << m.recon_mse << ',' << m.seconds << '\n';
}

}  // namespace densiwae
