#include "densiwae/divergences/scheffe.hpp"

#include <algorithm>
#include <cmath>

#include "densiwae/error.hpp"

namespace densiwae {

namespace {

// Indicator matrix: row r of `points`, pair (i, j) with i < j -> p_i(x) >= p_j(x).
std::vector<char> scheffe_membership(const std::vector<DensityCandidate>& c, const Tensor& points) {
  const std::size_t k = c.size();
  std::vector<double> dens(k);
  std::vector<char> in;
  in.reserve(points.rows() * k * (k - 1) / 2);
  for (std::size_t r = 0; r < points.rows(); ++r) {
    for (std::size_t i = 0; i < k; ++i) dens[i] = c[i].density(points.row(r));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j) in.push_back(dens[i] >= dens[j] ? 1 : 0);
  }
  return in;
}

std::vector<double> set_frequencies(const std::vector<char>& in, std::size_t rows, std::size_t pairs) {
  std::vector<double> f(pairs, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t p = 0; p < pairs; ++p) f[p] += in[r * pairs + p];
  for (auto& v : f) v /= static_cast<double>(rows);
  return f;
}

}  // namespace

ScheffeResult scheffe_select(const std::vector<DensityCandidate>& candidates, const Tensor& samples,
                             std::uint64_t seed, std::size_t mc_draws) {
  if (candidates.empty()) throw ConfigError("Scheffe tournament needs at least one candidate");
  if (samples.rows() == 0) throw ConfigError("Scheffe tournament needs samples");
  if (mc_draws == 0) throw ConfigError("Scheffe tournament needs Monte-Carlo draws");
  const std::size_t k = candidates.size();
  const std::size_t pairs = k * (k - 1) / 2;
  ScheffeResult out;
  out.max_discrepancy.assign(k, 0.0);
  if (pairs == 0) return out;

  const auto empirical = set_frequencies(scheffe_membership(candidates, samples), samples.rows(), pairs);
  for (std::size_t c = 0; c < k; ++c) {
    Rng rng = make_rng(derive_seed(seed, "scheffe", {c}));
    const Tensor draws = candidates[c].sampler(mc_draws, rng);
    if (draws.cols() != samples.cols()) throw ShapeError("Scheffe candidate sampler returned wrong dimension");
    const auto model = set_frequencies(scheffe_membership(candidates, draws), draws.rows(), pairs);
    double worst = 0.0;
    for (std::size_t p = 0; p < pairs; ++p) worst = std::max(worst, std::abs(model[p] - empirical[p]));
    out.max_discrepancy[c] = worst;
  }
  out.winner = static_cast<std::size_t>(
      std::min_element(out.max_discrepancy.begin(), out.max_discrepancy.end()) - out.max_discrepancy.begin());
  return out;
}

}  // namespace densiwae
