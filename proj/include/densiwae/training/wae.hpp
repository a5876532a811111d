#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "densiwae/autodiff/optimizer.hpp"
#include "densiwae/autodiff/tape.hpp"
#include "densiwae/data/dataset.hpp"
#include "densiwae/divergences/kernels.hpp"
#include "densiwae/networks/mlp.hpp"

namespace densiwae {

enum class DivergenceKind { mmd, gan };

struct WaeConfig {
  double lambda = 0.2;
  DivergenceKind divergence = DivergenceKind::mmd;
  KernelSpec kernel = KernelSpec::gaussian(1.0);
  LatentLawSpec latent;
  MlpSpec encoder;
  MlpSpec decoder;
  std::size_t batch_size = 256;
  std::size_t epochs = 200;
  std::size_t eval_interval = 0;  // 0: evaluate after the first and last epoch only
  OptimizerConfig optimizer;
  std::size_t latent_eval_cap = 10000;  // rows used for latent metrics
  std::size_t recon_eval_cap = 1000;    // rows used for the exact reconstruction W1
  std::size_t hist_bins = 50;
  double tolerance = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;

  void validate(std::size_t data_dim) const;
};

/// Five-Gaussian configuration with the output transform matched to the
/// latent support: identity (gaussian), sigmoid onto [0, 1] (beta), softplus
/// (exponential).
WaeConfig five_gaussian_config(const LatentLawSpec& latent, DivergenceKind div, double lambda,
                               HiddenActivation act = {Activation::relu, 2});

OutputTransform output_for_latent(const LatentLawSpec& latent);

struct MetricRecord {
  std::size_t epoch = 0;
  double latent_mmd = 0.0;
  double latent_js = 0.0;
  double latent_tv = 0.0;
  double recon_w1 = 0.0;
  double recon_mse = 0.0;
  double seconds = 0.0;
  bool recon_subsampled = false;
};

struct WaeState {
  Mlp encoder;
  Mlp decoder;
  std::optional<Mlp> discriminator;
  OptimizerState ae_optimizer;
  std::optional<OptimizerState> disc_optimizer;
  std::size_t epoch = 0;
  std::vector<double> loss_trace;  // mean training objective per epoch
};

WaeState init_wae(const WaeConfig& config);

/// Tape value of mean |x - D(E(x))| + lambda * latent surrogate for one
/// batch. The MMD surrogate is sqrt(MMD_b^2 + 1e-12) with the configured
/// kernel; the GAN surrogate is the non-saturating encoder loss against the
/// state's discriminator (held constant).
struct ObjectiveVars {
  Var total;
  Var recon;
  Var latent;
  MlpBinding encoder;
  MlpBinding decoder;
};

ObjectiveVars wae_objective(Tape& tape, const WaeState& state, const WaeConfig& config, const Tensor& batch,
                            const Tensor& prior_batch);

struct TrainResult {
  WaeState state;
  std::vector<MetricRecord> metrics;
};

TrainResult train_wae(const WaeConfig& config, const Dataset& data);

/// Latent metrics against fresh prior draws and exact reconstruction W1 on a
/// capped subsample.
MetricRecord evaluate(const WaeState& state, const Dataset& data, const WaeConfig& config, std::uint64_t eval_seed);

/// Latent metrics of an arbitrary encoded set against a prior draw.
MetricRecord latent_metrics(const Tensor& encoded, const Tensor& prior, const WaeConfig& config);

struct ConjugationResult {
  double recon_original = 0.0;
  double recon_conjugated = 0.0;
  double latent_original = 0.0;
  double latent_conjugated = 0.0;
  double loss_original = 0.0;
  double loss_conjugated = 0.0;
  bool recon_bitwise_equal = false;
};

/// Compares (E, D) with (phi^{-1} o E, D o phi) for phi(z) = R z. The prior
/// draw is rotated along with the encoder for the conjugated latent term.
ConjugationResult conjugation_check(const WaeState& state, const Tensor& rotation, const Tensor& eval_data,
                                    const Tensor& prior_draw, const KernelSpec& kernel, double lambda);

enum class ConstraintMetric { mmd, js, tv };

bool check_constraint(const MetricRecord& record, double t, ConstraintMetric metric = ConstraintMetric::mmd);

void write_metrics_csv(std::ostream& out, const std::vector<MetricRecord>& metrics);

}  // namespace densiwae
