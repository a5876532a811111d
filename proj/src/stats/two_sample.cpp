#include "densiwae/stats/two_sample.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <vector>

#include "densiwae/error.hpp"
#include "densiwae/random.hpp"

namespace densiwae {

namespace {

// Rows in lexicographic order, so results do not depend on input order.
Tensor sorted_rows(const Tensor& x) {
  std::vector<std::size_t> idx(x.rows());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const auto ra = x.row(a), rb = x.row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  });
  return x.select_rows(idx);
}

Tensor pool(const Tensor& x, const Tensor& y) {
  if (x.cols() != y.cols()) throw ShapeError("two-sample test: dimensions differ");
  const Tensor xs = sorted_rows(x), ys = sorted_rows(y);
  Tensor z = Tensor::matrix(x.rows() + y.rows(), x.cols());
  std::copy(xs.values().begin(), xs.values().end(), z.values().begin());
  std::copy(ys.values().begin(), ys.values().end(), z.values().begin() + static_cast<std::ptrdiff_t>(x.size()));
  return z;
}

std::vector<char> initial_labels(std::size_t n, std::size_t m) {
  std::vector<char> l(n + m, 0);
  std::fill(l.begin(), l.begin() + static_cast<std::ptrdiff_t>(n), 1);
  return l;
}

// Orthant codes of every pooled point relative to every pooled origin.
class OrthantTable {
 public:
  explicit OrthantTable(const Tensor& z) : n_(z.rows()), d_(z.cols()), code_(n_ * n_) {
    for (std::size_t o = 0; o < n_; ++o)
      for (std::size_t p = 0; p < n_; ++p) {
        unsigned char c = 0;
        for (std::size_t a = 0; a < d_; ++a)
          if (z(p, a) > z(o, a)) c = static_cast<unsigned char>(c | (1u << a));
        code_[o * n_ + p] = c;
      }
  }

  // Integer numerator (2 n m) D of the statistic for labels (1 = first sample).
  std::int64_t numerator(const std::vector<char>& labels, std::int64_t n, std::int64_t m) const {
    const std::size_t k = std::size_t{1} << d_;
    std::int64_t best_x = 0, best_y = 0;
    std::vector<std::int64_t> cx(k), cy(k);
    for (std::size_t o = 0; o < n_; ++o) {
      std::fill(cx.begin(), cx.end(), 0);
      std::fill(cy.begin(), cy.end(), 0);
      const unsigned char* row = code_.data() + o * n_;
      for (std::size_t p = 0; p < n_; ++p) (labels[p] ? cx : cy)[row[p]] += 1;
      std::int64_t diff = 0;
      for (std::size_t c = 0; c < k; ++c) diff = std::max(diff, std::abs(cx[c] * m - cy[c] * n));
      if (labels[o]) best_x = std::max(best_x, diff);
      else best_y = std::max(best_y, diff);
    }
    return best_x + best_y;
  }

 private:
  std::size_t n_, d_;
  std::vector<unsigned char> code_;
};

void check_ff(const Tensor& x, const Tensor& y) {
  if (x.cols() != y.cols()) throw ShapeError("ff_test: dimensions differ");
  if (x.cols() != 2 && x.cols() != 3) throw ConfigError("ff_test supports d = 2 or 3, got d = " + std::to_string(x.cols()));
  if (x.rows() < 5 || y.rows() < 5) throw ConfigError("ff_test needs at least 5 points per sample");
}

void check_cramer(const Tensor& x, const Tensor& y) {
  if (x.cols() != y.cols()) throw ShapeError("cramer_test: dimensions differ");
  if (x.rows() < 5 || y.rows() < 5) throw ConfigError("cramer_test needs at least 5 points per sample");
}

// Pooled matrix of phi(|z_i - z_j|^2) = |z_i - z_j| / 2.
std::vector<double> phi_matrix(const Tensor& z) {
  const std::size_t n = z.rows();
  std::vector<double> p(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) p[i * n + j] = p[j * n + i] = 0.5 * distance(z.row(i), z.row(j));
  return p;
}

double cramer_from_phi(const std::vector<double>& phi, const std::vector<char>& labels, std::size_t n, std::size_t m) {
  const std::size_t total = n + m;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < total; ++i) {
    const double* row = phi.data() + i * total;
    for (std::size_t j = i + 1; j < total; ++j) {
      const double v = row[j];
      if (labels[i] && labels[j]) sxx += v;
      else if (!labels[i] && !labels[j]) syy += v;
      else sxy += v;
    }
  }
  const double dn = static_cast<double>(n), dm = static_cast<double>(m);
  return dn * dm / (dn + dm) * (2.0 * sxy / (dn * dm) - 2.0 * sxx / (dn * dn) - 2.0 * syy / (dm * dm));
}

}  // namespace

double ff_statistic(const Tensor& x, const Tensor& y) {
  check_ff(x, y);
  const OrthantTable table(pool(x, y));
  const auto n = static_cast<std::int64_t>(x.rows()), m = static_cast<std::int64_t>(y.rows());
  return static_cast<double>(table.numerator(initial_labels(x.rows(), y.rows()), n, m)) /
         (2.0 * static_cast<double>(n) * static_cast<double>(m));
}

TestResult ff_test(const Tensor& x, const Tensor& y, std::size_t n_perm, std::uint64_t seed) {
  check_ff(x, y);
  if (n_perm == 0) throw ConfigError("ff_test needs at least one permutation");
  const OrthantTable table(pool(x, y));
  const auto n = static_cast<std::int64_t>(x.rows()), m = static_cast<std::int64_t>(y.rows());
  auto labels = initial_labels(x.rows(), y.rows());
  const std::int64_t observed = table.numerator(labels, n, m);
  Rng rng = make_rng(seed);
  std::size_t extreme = 0;
  for (std::size_t b = 0; b < n_perm; ++b) {
    std::shuffle(labels.begin(), labels.end(), rng);
    if (table.numerator(labels, n, m) >= observed) ++extreme;
  }
  TestResult r;
  r.test = "fasano_franceschini";
  r.statistic = static_cast<double>(observed) / (2.0 * static_cast<double>(n) * static_cast<double>(m));
  r.p_value = static_cast<double>(1 + extreme) / static_cast<double>(n_perm + 1);
  r.method = "permutation";
  r.replications = n_perm;
  r.seed = seed;
  r.n = x.rows();
  r.m = y.rows();
  return r;
}

double cramer_statistic(const Tensor& x, const Tensor& y) {
  check_cramer(x, y);
  return cramer_from_phi(phi_matrix(pool(x, y)), initial_labels(x.rows(), y.rows()), x.rows(), y.rows());
}

TestResult cramer_test(const Tensor& x, const Tensor& y, CramerMethod method, std::size_t n_rep, std::uint64_t seed) {
  check_cramer(x, y);
  if (n_rep == 0) throw ConfigError("cramer_test needs at least one replication");
  const std::size_t n = x.rows(), m = y.rows(), total = n + m;
  const auto phi = phi_matrix(pool(x, y));
  if (std::all_of(phi.begin(), phi.end(), [](double v) { return v == 0.0; }))
    throw ConfigError("cramer_test: degenerate data (all pairwise distances are zero)");
  auto labels = initial_labels(n, m);
  TestResult r;
  r.test = "cramer";
  r.statistic = cramer_from_phi(phi, labels, n, m);
  r.method = to_string(method);
  r.replications = n_rep;
  r.seed = seed;
  r.n = n;
  r.m = m;
  Rng rng = make_rng(seed);
  std::size_t extreme = 0;

  if (method == CramerMethod::monte_carlo) {
    for (std::size_t b = 0; b < n_rep; ++b) {
      std::shuffle(labels.begin(), labels.end(), rng);
      if (cramer_from_phi(phi, labels, n, m) >= r.statistic) ++extreme;
    }
    r.p_value = static_cast<double>(1 + extreme) / static_cast<double>(n_rep + 1);
    return r;
  }

  // Doubly centred -phi, scaled by 1/N.
  const auto N = static_cast<Eigen::Index>(total);
  Eigen::MatrixXd k(N, N);
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < N; ++j) k(i, j) = -phi[static_cast<std::size_t>(i) * total + static_cast<std::size_t>(j)];
  const Eigen::VectorXd row_mean = k.rowwise().mean();
  const double grand = row_mean.mean();
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < N; ++j) k(i, j) = k(i, j) - row_mean(i) - row_mean(j) + grand;
  k /= static_cast<double>(total);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k, Eigen::EigenvaluesOnly);
  std::vector<double> lambda;
  for (Eigen::Index i = 0; i < N; ++i) {
    const double v = eig.eigenvalues()(i);
    if (v > 0) lambda.push_back(v);
    else r.clipped_mass += -v;
  }
  std::sort(lambda.begin(), lambda.end(), std::greater<>());
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t b = 0; b < n_rep; ++b) {
    double s = 0.0;
    for (double l : lambda) {
      const double z = g(rng);
      s += l * z * z;
    }
    if (s >= r.statistic) ++extreme;
  }
  r.p_value = static_cast<double>(1 + extreme) / static_cast<double>(n_rep + 1);
  return r;
}

std::string to_string(CramerMethod m) { return m == CramerMethod::monte_carlo ? "monte_carlo" : "eigenvalue"; }

void write_test_header(std::ostream& out) { out << "test,stat,p,method,n,m,seed\n"; }

void write_test_row(std::ostream& out, const TestResult& r) {
  out.precision(17);
  out << r.test << ',' << r.statistic << ',' << r.p_value << ',' << r.method << ',' << r.n << ',' << r.m << ','
      << r.seed << '\n';
}

}  // namespace densiwae
