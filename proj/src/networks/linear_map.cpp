#include "densiwae/networks/linear_map.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "densiwae/error.hpp"

namespace densiwae {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Tensor principal_direction(const Tensor& sample) {
  const auto n = static_cast<Eigen::Index>(sample.rows());
  const auto k = static_cast<Eigen::Index>(sample.cols());
  Eigen::Map<const RowMat> x(sample.values().data(), n, k);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const RowMat centered = x.rowwise() - mean;
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(std::max<Eigen::Index>(n - 1, 1));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  Eigen::VectorXd v = eig.eigenvectors().col(k - 1);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (std::abs(v(i)) > 1e-12) {
      if (v(i) < 0) v = -v;
      break;
    }
  }
  Tensor d0 = Tensor::matrix(1, sample.cols());
  for (Eigen::Index i = 0; i < k; ++i) d0[static_cast<std::size_t>(i)] = v(i);
  return d0;
}

// Greedy nearest-neighbour chain starting at row 0.
std::vector<std::size_t> chain_order(const Tensor& atoms) {
  const std::size_t n = atoms.rows();
  std::vector<std::size_t> order{0};
  std::vector<bool> used(n, false);
  used[0] = true;
  for (std::size_t step = 1; step < n; ++step) {
    const std::size_t last = order.back();
    std::size_t best = n;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (used[j]) continue;
      const double d = squared_distance(atoms.row(last), atoms.row(j));
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    used[best] = true;
    order.push_back(best);
  }
  return order;
}

double diameter(const Tensor& atoms) {
  double best = 0.0;
  for (std::size_t i = 0; i < atoms.rows(); ++i)
    for (std::size_t j = i + 1; j < atoms.rows(); ++j)
      best = std::max(best, distance(atoms.row(i), atoms.row(j)));
  return best;
}

}  // namespace

Tensor apply(const LinearMap& map, const Tensor& points) {
  if (points.cols() != map.in_dim())
    throw ShapeError("linear map expects width " + std::to_string(map.in_dim()) + ", got " +
                     std::to_string(points.cols()));
  return matmul_bt(points, map.matrix);
}

LinearMap jl_projection(std::size_t d, std::size_t k, std::uint64_t seed) {
  if (d == 0 || k == 0) throw ConfigError("projection dimensions must be positive");
  LinearMap m{Tensor::matrix(k, d), seed};
  Rng rng = make_rng(seed);
  std::normal_distribution<double> g(0.0, 1.0 / std::sqrt(static_cast<double>(k)));
  for (double& v : m.matrix.values()) v = g(rng);
  return m;
}

std::size_t jl_dimension(std::size_t n, double eps) {
  if (!(eps > 0) || n < 1) throw ConfigError("jl_dimension needs n >= 1 and eps > 0");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::log(static_cast<double>(n)) / (eps * eps))));
}

Distortion distortion(const LinearMap& map, const Tensor& points) {
  const Tensor img = apply(map, points);
  Distortion out{std::numeric_limits<double>::infinity(), 0.0, 0};
  for (std::size_t i = 0; i < points.rows(); ++i) {
    for (std::size_t j = i + 1; j < points.rows(); ++j) {
      const double dx = distance(points.row(i), points.row(j));
      if (dx == 0.0) continue;
      const double r = distance(img.row(i), img.row(j)) / dx;
      out.min_ratio = std::min(out.min_ratio, r);
      out.max_ratio = std::max(out.max_ratio, r);
      ++out.pairs;
    }
  }
  if (out.pairs == 0) return Distortion{};
  return out;
}

LatentSampler standard_gaussian_sampler(std::size_t k) {
  return [k](std::size_t count, Rng& rng) {
    Tensor z = Tensor::matrix(count, k);
    std::normal_distribution<double> g(0.0, 1.0);
    for (double& v : z.values()) v = g(rng);
    return z;
  };
}

MemorizingDecoder build_memorizing_decoder(const Tensor& atoms, std::size_t k, double eps,
                                           std::uint64_t seed, const LatentSampler& sampler) {
  const std::size_t n = atoms.rows();
  const std::size_t d = atoms.cols();
  if (n < 1 || d < 1) throw ConfigError("memorizing decoder needs at least one atom");
  if (!(eps > 0)) throw ConfigError("memorizing decoder needs eps > 0");
  if (k < 1) throw ConfigError("latent dimension must be positive");
  const LatentSampler draw = sampler ? sampler : standard_gaussian_sampler(k);

  MemorizingDecoder dec;
  const auto order = chain_order(atoms);
  dec.ordered_atoms = atoms.select_rows(order);
  dec.per_atom = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(diameter(atoms) / eps)));
  const std::size_t m = n * dec.per_atom;

  constexpr std::size_t kMaxAttempts = 16;
  for (std::size_t attempt = 1; attempt <= kMaxAttempts; ++attempt) {
    Rng rng = make_rng(derive_seed(seed, "memorizing-reference", {attempt}));
    Tensor ref = draw(m, rng);
    if (ref.rows() != m || ref.cols() != k) throw ShapeError("latent sampler returned wrong shape");
    dec.d0 = LinearMap{principal_direction(ref), seed};
    const Tensor proj = apply(dec.d0, ref);
    std::vector<double> t(proj.values().begin(), proj.values().end());
    std::sort(t.begin(), t.end());

    dec.ramp_lo.clear();
    dec.ramp_hi.clear();
    bool ok = true;
    for (std::size_t j = 1; j < n && ok; ++j) {
      const double left = t[j * dec.per_atom - 1];
      const double right = t[j * dec.per_atom];
      if (!(right > left)) {
        ok = false;
        break;
      }
      const double gap = right - left;
      dec.ramp_lo.push_back(left + 0.25 * gap);
      dec.ramp_hi.push_back(right - 0.25 * gap);
      if (!(dec.ramp_hi.back() > dec.ramp_lo.back())) ok = false;
    }
    if (!ok) continue;
    dec.reference = std::move(ref);
    dec.attempts = attempt;

    if (n == 1) {
      MlpSpec spec;
      spec.widths = {k, d};
      dec.network = zero_mlp(spec);
      for (std::size_t c = 0; c < d; ++c) dec.network.biases[0][c] = dec.ordered_atoms(0, c);
      return dec;
    }
    const std::size_t h = 2 * (n - 1);
    MlpSpec spec = MlpSpec::uniform({k, h, d}, {Activation::relu, 2});
    dec.network = zero_mlp(spec);
    Tensor& w0 = dec.network.weights[0];
    Tensor& b0 = dec.network.biases[0];
    Tensor& w1 = dec.network.weights[1];
    Tensor& b1 = dec.network.biases[1];
    for (std::size_t j = 0; j + 1 < n; ++j) {
      for (std::size_t c = 0; c < k; ++c) {
        w0(2 * j, c) = dec.d0.matrix[c];
        w0(2 * j + 1, c) = dec.d0.matrix[c];
      }
      b0[2 * j] = -dec.ramp_lo[j];
      b0[2 * j + 1] = -dec.ramp_hi[j];
      const double width = dec.ramp_hi[j] - dec.ramp_lo[j];
      for (std::size_t c = 0; c < d; ++c) {
        const double slope = (dec.ordered_atoms(j + 1, c) - dec.ordered_atoms(j, c)) / width;
        w1(c, 2 * j) = slope;
        w1(c, 2 * j + 1) = -slope;
      }
    }
    for (std::size_t c = 0; c < d; ++c) b1[c] = dec.ordered_atoms(0, c);
    return dec;
  }
  throw NumericalError("memorizing decoder: projected reference sample degenerate after " +
                       std::to_string(kMaxAttempts) + " reseeds");
}

Tensor decode(const MemorizingDecoder& dec, const Tensor& latents) { return forward(dec.network, latents); }

double relu_capacity_bound(std::size_t width, std::size_t depth, std::size_t input_dim) {
  if (input_dim == 0) throw ConfigError("input dimension must be positive");
  if (width <= input_dim + 1) return 0.0;
  const double r = static_cast<double>(width - input_dim - 1);
  return r / 2.0 * std::floor(r / (6.0 * static_cast<double>(input_dim))) *
             std::floor(static_cast<double>(depth) / 2.0) +
         2.0;
}

}  // namespace densiwae
