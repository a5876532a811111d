#include "densiwae/divergences/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "densiwae/error.hpp"
#include "densiwae/random.hpp"

namespace densiwae {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_sets(const Tensor& x, const Tensor& y) {
  if (x.rows() == 0 || y.rows() == 0) throw ConfigError("W1 needs non-empty point sets");
  if (x.cols() != y.cols())
    throw ShapeError("W1: dimensions differ (" + std::to_string(x.cols()) + " vs " + std::to_string(y.cols()) + ")");
}

double logsumexp(const std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

Tensor cost_matrix(const Tensor& x, const Tensor& y, GroundMetric metric) {
  check_sets(x, y);
  Tensor c = Tensor::matrix(x.rows(), y.rows());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < y.rows(); ++j)
      c(i, j) = metric == GroundMetric::l2 ? distance(x.row(i), y.row(j)) : l1_distance(x.row(i), y.row(j));
  return c;
}

Assignment solve_assignment(const Tensor& cost) {
  const std::size_t n = cost.rows();
  if (n == 0 || cost.cols() != n) throw ShapeError("assignment needs a non-empty square cost matrix");
  // 1-indexed potentials; p[j] is the row matched to column j.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  Assignment a;
  a.col_of_row.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) a.col_of_row[p[j] - 1] = j - 1;
  for (std::size_t i = 0; i < n; ++i) a.total_cost += cost(i, a.col_of_row[i]);
  return a;
}

double solve_transport(const Tensor& cost, const std::vector<std::int64_t>& supply,
                       const std::vector<std::int64_t>& demand) {
  const std::size_t n = supply.size(), m = demand.size();
  if (cost.rows() != n || cost.cols() != m) throw ShapeError("transport: cost matrix does not match marginals");
  if (n == 0 || m == 0) throw ConfigError("transport needs non-empty marginals");
  for (auto s : supply)
    if (s < 0) throw ConfigError("transport supplies must be nonnegative");
  for (auto d : demand)
    if (d < 0) throw ConfigError("transport demands must be nonnegative");
  if (std::accumulate(supply.begin(), supply.end(), std::int64_t{0}) !=
      std::accumulate(demand.begin(), demand.end(), std::int64_t{0}))
    throw ConfigError("transport problem is unbalanced");

  struct Cell {
    std::size_t i, j;
    std::int64_t flow;
  };
  std::vector<Cell> basis;
  std::vector<char> is_basic(n * m, 0);

  // North-west corner; exactly n + m - 1 cells, possibly degenerate.
  {
    auto s = supply;
    auto d = demand;
    std::size_t i = 0, j = 0;
    while (i < n && j < m) {
      const std::int64_t q = std::min(s[i], d[j]);
      basis.push_back({i, j, q});
      is_basic[i * m + j] = 1;
      s[i] -= q;
      d[j] -= q;
      if (i + 1 == n && j + 1 == m) break;
      if (s[i] == 0 && i + 1 < n) ++i;
      else ++j;
    }
  }

  double scale = 0.0;
  for (double c : cost.values()) scale = std::max(scale, std::abs(c));
  const double tol = 1e-12 * std::max(1.0, scale);

  const std::size_t nodes = n + m;
  std::vector<std::vector<std::size_t>> adj(nodes);  // cell indices
  std::vector<double> pot(nodes);
  std::vector<std::size_t> parent_cell(nodes);
  std::vector<std::size_t> parent_node(nodes);
  std::vector<char> seen(nodes);
  std::vector<std::size_t> queue;
  queue.reserve(nodes);

  const std::size_t max_iter = 50 * (n + m) * (n + m) + 1000;
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    for (auto& a : adj) a.clear();
    for (std::size_t c = 0; c < basis.size(); ++c) {
      adj[basis[c].i].push_back(c);
      adj[n + basis[c].j].push_back(c);
    }
    // Potentials u_i (nodes 0..n-1) and v_j (nodes n..n+m-1) with u_i + v_j = c_ij on the basis tree.
    std::fill(seen.begin(), seen.end(), 0);
    queue.clear();
    queue.push_back(0);
    seen[0] = 1;
    pot[0] = 0.0;
    for (std::size_t q = 0; q < queue.size(); ++q) {
      const std::size_t a = queue[q];
      for (auto c : adj[a]) {
        const std::size_t b = a < n ? n + basis[c].j : basis[c].i;
        if (seen[b]) continue;
        seen[b] = 1;
        pot[b] = cost(basis[c].i, basis[c].j) - pot[a];
        queue.push_back(b);
      }
    }
    if (queue.size() != nodes) throw NumericalError("transport simplex: basis is not a spanning tree");

    double best = -tol;
    std::size_t ei = n, ej = m;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if (is_basic[i * m + j]) continue;
        const double r = cost(i, j) - pot[i] - pot[n + j];
        if (r < best) {
          best = r;
          ei = i;
          ej = j;
        }
      }
    }
    if (ei == n) {
      double total = 0.0;
      for (const auto& c : basis) total += static_cast<double>(c.flow) * cost(c.i, c.j);
      return total;
    }

    // Tree path from row ei to column ej.
    std::fill(seen.begin(), seen.end(), 0);
    queue.clear();
    queue.push_back(ei);
    seen[ei] = 1;
    for (std::size_t q = 0; q < queue.size() && !seen[n + ej]; ++q) {
      const std::size_t a = queue[q];
      for (auto c : adj[a]) {
        const std::size_t b = a < n ? n + basis[c].j : basis[c].i;
        if (seen[b]) continue;
        seen[b] = 1;
        parent_cell[b] = c;
        parent_node[b] = a;
        queue.push_back(b);
      }
    }
    // Walking back from column ej, edges alternate -, +, -, ... (entering cell is +).
    std::vector<std::size_t> path;
    for (std::size_t b = n + ej; b != ei; b = parent_node[b]) path.push_back(parent_cell[b]);
    std::int64_t theta = std::numeric_limits<std::int64_t>::max();
    std::size_t leave = basis.size();
    for (std::size_t k = 0; k < path.size(); k += 2) {
      if (basis[path[k]].flow < theta) {
        theta = basis[path[k]].flow;
        leave = path[k];
      }
    }
    for (std::size_t k = 0; k < path.size(); ++k) basis[path[k]].flow += (k % 2 == 0) ? -theta : theta;
    is_basic[basis[leave].i * m + basis[leave].j] = 0;
    basis[leave] = {ei, ej, theta};
    is_basic[ei * m + ej] = 1;
  }
  throw NumericalError("transport simplex did not converge");
}

double w1_1d(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw ConfigError("W1 needs non-empty point sets");
  std::vector<double> a(x.begin(), x.end()), b(y.begin(), y.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double wa = 1.0 / static_cast<double>(a.size()), wb = 1.0 / static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double fa = 0.0, fb = 0.0, total = 0.0;
  double prev = std::min(a[0], b[0]);
  while (i < a.size() || j < b.size()) {
    const double next = (j >= b.size() || (i < a.size() && a[i] <= b[j])) ? a[i] : b[j];
    total += std::abs(fa - fb) * (next - prev);
    prev = next;
    while (i < a.size() && a[i] == next) {
      fa += wa;
      ++i;
    }
    while (j < b.size() && b[j] == next) {
      fb += wb;
      ++j;
    }
  }
  return total;
}

namespace {

struct MassPoints {
  Tensor points;
  std::vector<std::int64_t> counts;
};

// Distinct rows with their multiplicities.
MassPoints collapse_rows(const Tensor& x) {
  std::vector<std::size_t> idx(x.rows());
  std::iota(idx.begin(), idx.end(), 0);
  auto less = [&](std::size_t a, std::size_t b) {
    const auto ra = x.row(a), rb = x.row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  };
  std::sort(idx.begin(), idx.end(), less);
  MassPoints out;
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (k > 0 && !less(idx[k - 1], idx[k])) {
      ++out.counts.back();
      continue;
    }
    keep.push_back(idx[k]);
    out.counts.push_back(1);
  }
  out.points = x.select_rows(keep);
  return out;
}

}  // namespace

double w1_exact(const Tensor& x, const Tensor& y, GroundMetric metric) {
  check_sets(x, y);
  if (x.cols() == 1) return w1_1d(x.values(), y.values());
  const std::size_t n = x.rows(), m = y.rows();
  if (n == m) return solve_assignment(cost_matrix(x, y, metric)).total_cost / static_cast<double>(n);
  const std::size_t g = std::gcd(n, m);
  const auto a = static_cast<std::int64_t>(m / g), b = static_cast<std::int64_t>(n / g);
  const double total = static_cast<double>(n) * static_cast<double>(a);
  const MassPoints px = collapse_rows(x), py = collapse_rows(y);
  std::vector<std::int64_t> supply, demand;
  for (auto k : px.counts) supply.push_back(k * a);
  for (auto k : py.counts) demand.push_back(k * b);
  return solve_transport(cost_matrix(px.points, py.points, metric), supply, demand) / total;
}

CappedW1 w1_exact_capped(const Tensor& x, const Tensor& y, GroundMetric metric, std::size_t cap, std::uint64_t seed) {
  check_sets(x, y);
  if (cap == 0) throw ConfigError("W1 cap must be positive");
  Rng rng = make_rng(seed);
  auto shrink = [&](const Tensor& t) {
    if (t.rows() <= cap) return t;
    std::vector<std::size_t> idx(t.rows());
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < cap; ++i) {
      std::uniform_int_distribution<std::size_t> u(i, idx.size() - 1);
      std::swap(idx[i], idx[u(rng)]);
    }
    idx.resize(cap);
    std::sort(idx.begin(), idx.end());
    return t.select_rows(idx);
  };
  CappedW1 out;
  const Tensor xs = shrink(x), ys = shrink(y);
  out.subsampled = xs.rows() != x.rows() || ys.rows() != y.rows();
  out.used_x = xs.rows();
  out.used_y = ys.rows();
  out.value = w1_exact(xs, ys, metric);
  return out;
}

SinkhornResult w1_sinkhorn(const Tensor& x, const Tensor& y, double reg, std::size_t max_iter, double tol,
                           GroundMetric metric) {
  if (!(reg > 0)) throw ConfigError("Sinkhorn regularisation must be positive");
  const Tensor c = cost_matrix(x, y, metric);
  const std::size_t n = x.rows(), m = y.rows();
  const double loga = -std::log(static_cast<double>(n)), logb = -std::log(static_cast<double>(m));
  std::vector<double> f(n, 0.0), g(m, 0.0), buf;

  auto col_residual = [&]() {
    double r = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += std::exp(loga + logb + (f[i] + g[j] - c(i, j)) / reg);
      r += std::abs(s - 1.0 / static_cast<double>(m));
    }
    return r;
  };

  SinkhornResult out;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    buf.resize(n);
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t i = 0; i < n; ++i) buf[i] = loga + (f[i] - c(i, j)) / reg;
      g[j] = -reg * logsumexp(buf);
    }
    buf.resize(m);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) buf[j] = logb + (g[j] - c(i, j)) / reg;
      f[i] = -reg * logsumexp(buf);
    }
    out.iterations = it;
    if (it % 10 == 0 || it == max_iter) {
      out.residual = col_residual();
      if (out.residual < tol) {
        out.converged = true;
        break;
      }
    }
  }
  double cost = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) cost += std::exp(loga + logb + (f[i] + g[j] - c(i, j)) / reg) * c(i, j);
  out.cost = cost;
  return out;
}

}  // namespace densiwae
