#include "densiwae/experiments/setup.hpp"

#include <filesystem>
#include <numeric>

#include "densiwae/error.hpp"
#include "densiwae/networks/architectures.hpp"

namespace densiwae {

const std::set<std::string>& wae_config_keys() {
  static const std::set<std::string> keys{
      "dataset",    "latent",        "latent_dim",      "divergence",     "lambda",    "kernel",
      "kernel_sigma", "energy_alpha", "activation",     "group_size",     "optimizer", "learning_rate",
      "clip_norm",  "batch_size",    "epochs",          "eval_interval",  "latent_eval_cap",
      "recon_eval_cap", "hist_bins", "tolerance",       "n",              "mnist_dir", "mnist_subset"};
  return keys;
}

WaeConfig wae_config_from(const KeyValueConfig& c, std::uint64_t seed) {
  const std::string dataset = c.get_string("dataset", "five_gaussian");
  const std::size_t default_k = dataset == "mnist" ? 8 : 2;
  const LatentLawSpec latent = latent_law_from_string(c.get_string("latent", "gaussian"), c.get_size("latent_dim", default_k));

  const std::string div = c.get_string("divergence", "mmd");
  DivergenceKind kind;
  if (div == "mmd") kind = DivergenceKind::mmd;
  else if (div == "gan") kind = DivergenceKind::gan;
  else throw ConfigError("unknown divergence '" + div + "'");

  HiddenActivation act;
  act.kind = activation_from_string(c.get_string("activation", "relu"));
  act.group_size = c.get_size("group_size", 2);
  if (act.kind != Activation::relu && act.kind != Activation::groupsort)
    throw ConfigError("hidden activation must be relu or groupsort");

  WaeConfig w = five_gaussian_config(latent, kind, c.get_double("lambda", 0.2), act);
  if (dataset == "mnist") {
    w.encoder = mnist_encoder_spec(latent.k, act, output_for_latent(latent));
    w.decoder = mnist_decoder_spec(latent.k, act);
  } else if (dataset != "five_gaussian") {
    throw ConfigError("unknown dataset '" + dataset + "'");
  }

  const std::string kernel = c.get_string("kernel", "gaussian");
  if (kernel == "gaussian") w.kernel = KernelSpec::gaussian(c.get_double("kernel_sigma", 1.0));
  else if (kernel == "energy") w.kernel = KernelSpec::energy(c.get_double("energy_alpha", 0.5));
  else throw ConfigError("unknown kernel '" + kernel + "'");

  const std::string opt = c.get_string("optimizer", "adam");
  if (opt == "adam") w.optimizer.kind = OptimizerKind::adam;
  else if (opt == "sgd") w.optimizer.kind = OptimizerKind::sgd;
  else throw ConfigError("unknown optimizer '" + opt + "'");
  w.optimizer.learning_rate = c.get_double("learning_rate", w.optimizer.learning_rate);
  if (c.has("clip_norm")) w.optimizer.clip_norm = c.get_double("clip_norm", 0.0);

  w.batch_size = c.get_size("batch_size", w.batch_size);
  w.epochs = c.get_size("epochs", w.epochs);
  w.eval_interval = c.get_size("eval_interval", w.eval_interval);
  w.latent_eval_cap = c.get_size("latent_eval_cap", w.latent_eval_cap);
  w.recon_eval_cap = c.get_size("recon_eval_cap", w.recon_eval_cap);
  w.hist_bins = c.get_size("hist_bins", w.hist_bins);
  w.tolerance = c.get_double("tolerance", w.tolerance);
  w.seed = seed;
  w.validate(dataset == "mnist" ? 784 : 3);
  return w;
}

Dataset load_dataset(const KeyValueConfig& c, std::uint64_t seed) {
  const std::string dataset = c.get_string("dataset", "five_gaussian");
  if (dataset == "five_gaussian") {
    const std::size_t n = c.get_size("n", 5000);
    if (n == 0) throw ConfigError("n must be positive");
    return sample_five_gaussian(n, seed);
  }
  if (dataset == "mnist") {
    const std::filesystem::path dir = c.get_string("mnist_dir", "data/mnist");
    Dataset d = load_mnist_idx((dir / "train-images-idx3-ubyte").string(), (dir / "train-labels-idx1-ubyte").string());
    const std::size_t keep = c.get_size("mnist_subset", 0);
    if (keep != 0 && keep < d.n()) {
      std::vector<std::size_t> rows(keep);
      std::iota(rows.begin(), rows.end(), std::size_t{0});
      d = d.subset(rows);
    }
    return d;
  }
  throw ConfigError("unknown dataset '" + dataset + "'");
}

}  // namespace densiwae
