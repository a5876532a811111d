#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "densiwae/autodiff/tensor.hpp"
#include "densiwae/error.hpp"
#include "densiwae/random.hpp"

namespace densiwae {

enum class ContaminationLaw { gaussian, cauchy, dirichlet };

struct ContaminationSpec {
  double fraction = 0.0;
  double level = 0.0;
  ContaminationLaw law = ContaminationLaw::gaussian;
  std::vector<double> dirichlet_params;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ContaminationRecord {
  ContaminationSpec spec;
  std::vector<std::size_t> corrupted;  // sorted row indices
};

struct Dataset {
  Tensor x;
  std::string tag;
  std::uint64_t seed = 0;
  std::optional<ContaminationRecord> contamination;
  std::vector<int> labels;  // empty unless the source carries labels

  std::size_t n() const { return x.rows(); }
  std::size_t d() const { return x.cols(); }
  Dataset subset(std::span<const std::size_t> rows) const;
};

enum class LatentKind { gaussian, beta_marginals, exp_marginals };

struct LatentLawSpec {
  LatentKind kind = LatentKind::gaussian;
  std::size_t k = 2;
  double a = 0.5;     // beta shape a
  double b = 0.8;     // beta shape b
  double rate = 1.0;  // exponential rate

  void validate() const;
  std::string name() const;
};

LatentLawSpec latent_law_from_string(const std::string& name, std::size_t k = 2);
ContaminationLaw contamination_law_from_string(const std::string& name);
std::string to_string(ContaminationLaw law);

/// Vertices (0,0,0), (1,0,0), (0,1,0), (0,0,1), (1,1,1).
const std::vector<std::array<double, 3>>& five_gaussian_vertices();

/// Equal-weight mixture of N(v, I_3) over the five vertices. Labels hold the
/// component index of each row.
Dataset sample_five_gaussian(std::size_t n, std::uint64_t seed);

Dataset sample_latent(const LatentLawSpec& spec, std::size_t n, std::uint64_t seed);
Tensor sample_latent_rows(const LatentLawSpec& spec, std::size_t n, Rng& rng);

/// Replaces floor(fraction * n) rows, chosen uniformly without replacement,
/// by (1 - level) x + level y with y drawn from the contaminating law.
Dataset contaminate(const Dataset& data, const ContaminationSpec& spec);

struct EpsilonEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Monte-Carlo estimate of E|X - Y| with X, Y independent uniform rows.
EpsilonEstimate wasserstein_epsilon(const Dataset& a, const Dataset& b, std::size_t n_pairs, std::uint64_t seed);

/// Uniform subset of `count` distinct indices from [0, n), in draw order.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count, Rng& rng);

enum class IdxErrorKind { io, magic_mismatch, truncated, count_mismatch };

class IdxError : public ConfigError {
 public:
  IdxError(IdxErrorKind kind, const std::string& what) : ConfigError(what), kind_(kind) {}
  IdxErrorKind kind() const { return kind_; }

 private:
  IdxErrorKind kind_;
};

/// Parses an IDX image file (magic 0x00000803) into an n x (rows*cols)
/// matrix scaled to [0, 1].
Tensor parse_idx_images(const std::string& bytes);
/// Parses an IDX label file (magic 0x00000801).
std::vector<int> parse_idx_labels(const std::string& bytes);

Dataset load_mnist_idx(const std::string& images_path, const std::string& labels_path);

/// CSV with header x0,...,x{d-1}[,label].
void write_csv(std::ostream& out, const Dataset& data);
void write_csv(const std::string& path, const Dataset& data);

}  // namespace densiwae
