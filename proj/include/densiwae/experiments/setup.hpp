#pragma once

#include <cstdint>
#include <set>
#include <string>

#include "densiwae/data/dataset.hpp"
#include "densiwae/experiments/config.hpp"
#include "densiwae/training/wae.hpp"

namespace densiwae {

/// Keys read by wae_config_from and load_dataset.
const std::set<std::string>& wae_config_keys();

/// Builds a WAE configuration from documented keys:
///   dataset       five_gaussian | mnist
///   latent        gaussian | beta | exponential     latent_dim
///   divergence    mmd | gan                         lambda
///   kernel        gaussian | energy                 kernel_sigma, energy_alpha
///   activation    relu | groupsort                  group_size
///   optimizer     adam | sgd                        learning_rate, clip_norm
///   batch_size, epochs, eval_interval, latent_eval_cap, recon_eval_cap,
///   hist_bins, tolerance
WaeConfig wae_config_from(const KeyValueConfig& c, std::uint64_t seed);

/// five_gaussian: `n` rows sampled with `seed`.
/// mnist: IDX files under `mnist_dir`, first `mnist_subset` rows (0: all).
Dataset load_dataset(const KeyValueConfig& c, std::uint64_t seed);

}  // namespace densiwae
