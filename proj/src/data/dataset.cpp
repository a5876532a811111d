#include "densiwae/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace densiwae {

namespace {

double gamma_draw(double shape, Rng& rng) { return std::gamma_distribution<double>(shape, 1.0)(rng); }

double beta_draw(double a, double b, Rng& rng) {
  const double x = gamma_draw(a, rng);
  const double y = gamma_draw(b, rng);
  const double s = x + y;
  // Both gammas can underflow to 0 for small shapes; fall back to the mean.
  return s > 0 ? x / s : a / (a + b);
}

}  // namespace

void ContaminationSpec::validate() const {
  if (!(fraction >= 0 && fraction <= 1)) throw ConfigError("contamination fraction must lie in [0, 1]");
  if (!(level >= 0 && level <= 1)) throw ConfigError("contamination level must lie in [0, 1]");
  if (law == ContaminationLaw::dirichlet) {
    if (dirichlet_params.empty()) throw ConfigError("dirichlet contamination needs parameters");
    for (double p : dirichlet_params)
      if (!(p > 0)) throw ConfigError("dirichlet parameters must be positive");
  }
}

void LatentLawSpec::validate() const {
  if (k < 1) throw ConfigError("latent dimension must be >= 1");
  if (kind == LatentKind::beta_marginals && !(a > 0 && b > 0)) throw ConfigError("beta shapes must be positive");
  if (kind == LatentKind::exp_marginals && !(rate > 0)) throw ConfigError("exponential rate must be positive");
}

std::string LatentLawSpec::name() const {
  switch (kind) {
    case LatentKind::gaussian: return "gaussian";
    case LatentKind::beta_marginals: return "beta";
    case LatentKind::exp_marginals: return "exponential";
  }
  return "unknown";
}

LatentLawSpec latent_law_from_string(const std::string& name, std::size_t k) {
  LatentLawSpec s;
  s.k = k;
  if (name == "gaussian") s.kind = LatentKind::gaussian;
  else if (name == "beta") s.kind = LatentKind::beta_marginals;
  else if (name == "exponential" || name == "exp") s.kind = LatentKind::exp_marginals;
  else throw ConfigError("unknown latent law '" + name + "'");
  return s;
}

ContaminationLaw contamination_law_from_string(const std::string& name) {
  if (name == "gaussian") return ContaminationLaw::gaussian;
  if (name == "cauchy") return ContaminationLaw::cauchy;
  if (name == "dirichlet") return ContaminationLaw::dirichlet;
  throw ConfigError("unknown contamination law '" + name + "'");
}

std::string to_string(ContaminationLaw law) {
  switch (law) {
    case ContaminationLaw::gaussian: return "gaussian";
    case ContaminationLaw::cauchy: return "cauchy";
    case ContaminationLaw::dirichlet: return "dirichlet";
  }
  return "unknown";
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.x = x.select_rows(rows);
  out.tag = tag;
  out.seed = seed;
  if (!labels.empty())
    for (auto r : rows) out.labels.push_back(labels.at(r));
  return out;
}

const std::vector<std::array<double, 3>>& five_gaussian_vertices() {
  static const std::vector<std::array<double, 3>> v{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}};
  return v;
}

Dataset sample_five_gaussian(std::size_t n, std::uint64_t seed) {
  if (n < 5) throw ConfigError("five-gaussian sampler needs n >= 5");
  Rng rng = make_rng(seed);
  std::uniform_int_distribution<int> comp(0, 4);
  std::normal_distribution<double> g(0.0, 1.0);
  Dataset ds;
  ds.x = Tensor::matrix(n, 3);
  ds.tag = "five_gaussian";
  ds.seed = seed;
  ds.labels.resize(n);
  const auto& verts = five_gaussian_vertices();
  for (std::size_t i = 0; i < n; ++i) {
    const int c = comp(rng);
    ds.labels[i] = c;
    for (std::size_t j = 0; j < 3; ++j) ds.x(i, j) = verts[static_cast<std::size_t>(c)][j] + g(rng);
  }
  return ds;
}

Tensor sample_latent_rows(const LatentLawSpec& spec, std::size_t n, Rng& rng) {
  spec.validate();
  Tensor z = Tensor::matrix(n, spec.k);
  switch (spec.kind) {
    case LatentKind::gaussian: {
      std::normal_distribution<double> g(0.0, 1.0);
      for (double& v : z.values()) v = g(rng);
      break;
    }
    case LatentKind::beta_marginals:
      for (double& v : z.values()) v = beta_draw(spec.a, spec.b, rng);
      break;
    case LatentKind::exp_marginals: {
      std::exponential_distribution<double> e(spec.rate);
      for (double& v : z.values()) v = e(rng);
      break;
    }
  }
  return z;
}

Dataset sample_latent(const LatentLawSpec& spec, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("latent sampler needs n >= 1");
  Rng rng = make_rng(seed);
  Dataset ds;
  ds.x = sample_latent_rows(spec, n, rng);
  ds.tag = "latent_" + spec.name();
  ds.seed = seed;
  return ds;
}

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count, Rng& rng) {
  if (count > n) throw ConfigError("cannot draw " + std::to_string(count) + " of " + std::to_string(n) + " without replacement");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> u(i, n - 1);
    std::swap(idx[i], idx[u(rng)]);
  }
  idx.resize(count);
  return idx;
}

Dataset contaminate(const Dataset& data, const ContaminationSpec& spec) {
  spec.validate();
  const std::size_t d = data.d();
  if (spec.law == ContaminationLaw::dirichlet && spec.dirichlet_params.size() != d)
    throw ConfigError("dirichlet has " + std::to_string(spec.dirichlet_params.size()) +
                      " parameters but data dimension is " + std::to_string(d));
  Rng rng = make_rng(spec.seed);
  const auto count = static_cast<std::size_t>(std::floor(spec.fraction * static_cast<double>(data.n())));
  auto idx = sample_without_replacement(data.n(), count, rng);
  std::sort(idx.begin(), idx.end());

  Dataset out = data;
  std::normal_distribution<double> g(0.0, 1.0);
  std::cauchy_distribution<double> cauchy(0.0, 1.0);
  std::vector<double> y(d);
  for (auto i : idx) {
    switch (spec.law) {
      case ContaminationLaw::gaussian:
        for (auto& v : y) v = g(rng);
        break;
      case ContaminationLaw::cauchy:
        for (auto& v : y) v = cauchy(rng);
        break;
      case ContaminationLaw::dirichlet: {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += (y[j] = gamma_draw(spec.dirichlet_params[j], rng));
        for (auto& v : y) v /= s;
        break;
      }
    }
    if (spec.level == 0.0) continue;
    for (std::size_t j = 0; j < d; ++j) out.x(i, j) = (1.0 - spec.level) * data.x(i, j) + spec.level * y[j];
  }
  out.contamination = ContaminationRecord{spec, std::move(idx)};
  return out;
}

EpsilonEstimate wasserstein_epsilon(const Dataset& a, const Dataset& b, std::size_t n_pairs, std::uint64_t seed) {
  if (a.d() != b.d()) throw ShapeError("wasserstein_epsilon: dimension mismatch");
  if (a.n() == 0 || b.n() == 0 || n_pairs == 0) throw ConfigError("wasserstein_epsilon needs non-empty inputs");
  Rng rng = make_rng(seed);
  std::uniform_int_distribution<std::size_t> ua(0, a.n() - 1), ub(0, b.n() - 1);
  double mean = 0.0, m2 = 0.0;
  for (std::size_t t = 0; t < n_pairs; ++t) {
    const double v = distance(a.x.row(ua(rng)), b.x.row(ub(rng)));
    const double delta = v - mean;
    mean += delta / static_cast<double>(t + 1);
    m2 += delta * (v - mean);
  }
  const double var = n_pairs > 1 ? m2 / static_cast<double>(n_pairs - 1) : 0.0;
  return {mean, std::sqrt(var / static_cast<double>(n_pairs))};
}

namespace {

std::uint32_t read_be32(const std::string& bytes, std::size_t offset) {
  if (offset + 4 > bytes.size()) throw IdxError(IdxErrorKind::truncated, "IDX header truncated");
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) v = (v << 8) | static_cast<unsigned char>(bytes[offset + i]);
  return v;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IdxError(IdxErrorKind::io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string hex32(std::uint32_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s = "0x";
  for (int shift = 28; shift >= 0; shift -= 4) s += digits[(v >> shift) & 0xF];
  return s;
}

}  // namespace

Tensor parse_idx_images(const std::string& bytes) {
  const std::uint32_t magic = read_be32(bytes, 0);
  if (magic != 0x00000803) throw IdxError(IdxErrorKind::magic_mismatch, "IDX image magic mismatch: " + hex32(magic));
  const std::size_t n = read_be32(bytes, 4);
  const std::size_t rows = read_be32(bytes, 8);
  const std::size_t cols = read_be32(bytes, 12);
  const std::size_t pixels = rows * cols;
  if (bytes.size() < 16 + n * pixels)
    throw IdxError(IdxErrorKind::truncated, "IDX image payload truncated: expected " + std::to_string(n * pixels) +
                                                " bytes, found " + std::to_string(bytes.size() - 16));
  Tensor x = Tensor::matrix(n, pixels);
  for (std::size_t i = 0; i < n * pixels; ++i) x[i] = static_cast<unsigned char>(bytes[16 + i]) / 255.0;
  return x;
}

std::vector<int> parse_idx_labels(const std::string& bytes) {
  const std::uint32_t magic = read_be32(bytes, 0);
  if (magic != 0x00000801) throw IdxError(IdxErrorKind::magic_mismatch, "IDX label magic mismatch: " + hex32(magic));
  const std::size_t n = read_be32(bytes, 4);
  if (bytes.size() < 8 + n)
    throw IdxError(IdxErrorKind::truncated, "IDX label payload truncated: expected " + std::to_string(n) +
                                                " bytes, found " + std::to_string(bytes.size() - 8));
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<unsigned char>(bytes[8 + i]);
  return labels;
}

Dataset load_mnist_idx(const std::string& images_path, const std::string& labels_path) {
  Dataset ds;
  ds.x = parse_idx_images(slurp(images_path));
  ds.labels = parse_idx_labels(slurp(labels_path));
  if (ds.labels.size() != ds.x.rows())
    throw IdxError(IdxErrorKind::count_mismatch, "IDX count mismatch: " + std::to_string(ds.x.rows()) + " images, " +
                                                     std::to_string(ds.labels.size()) + " labels");
  ds.tag = "mnist";
  return ds;
}

void write_csv(std::ostream& out, const Dataset& data) {
  for (std::size_t j = 0; j < data.d(); ++j) out << (j ? "," : "") << 'x' << j;
  if (!data.labels.empty()) out << ",label";
  out << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < data.n(); ++i) {
    for (std::size_t j = 0; j < data.d(); ++j) out << (j ? "," : "") << data.x(i, j);
    if (!data.labels.empty()) out << ',' << data.labels[i];
    out << '\n';
  }
}

void write_csv(const std::string& path, const Dataset& data) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  write_csv(f, data);
}

}  // namespace densiwae
