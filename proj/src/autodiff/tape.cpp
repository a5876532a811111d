#include "densiwae/autodiff/tape.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "densiwae/error.hpp"

namespace densiwae {

namespace {

void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                     b.shape_string());
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double stable_softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, false, {}, {}});
  return Var{nodes_.size() - 1};
}

Var Tape::parameter(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, true, {}, {}});
  return Var{nodes_.size() - 1};
}

const Tensor& Tape::grad(Var v) const {
  const Node& n = nodes_.at(v.id);
  if (n.grad.size() != n.value.size())
    throw ConfigError("grad() requested before backward() for node " + std::to_string(v.id));
  return n.grad;
}

Var Tape::push(Tensor value, std::vector<std::size_t> parents, Backward backward) {
  bool rg = false;
  for (auto p : parents) rg = rg || nodes_[p].requires_grad;
  nodes_.push_back(Node{std::move(value), {}, rg, std::move(parents), rg ? std::move(backward) : Backward{}});
  return Var{nodes_.size() - 1};
}

Tensor& Tape::grad_buffer(std::size_t id) { return nodes_[id].grad; }

void Tape::accumulate(std::size_t id, const Tensor& g) {
  if (!nodes_[id].requires_grad) return;
  nodes_[id].grad += g;
}

void Tape::backward(Var loss) {
  if (loss.id >= nodes_.size()) throw ConfigError("backward(): unknown node");
  if (nodes_[loss.id].value.size() != 1)
    throw ShapeError("backward(): loss must be scalar, got " + nodes_[loss.id].value.shape_string());
  for (auto& n : nodes_) n.grad = Tensor(n.value.shape(), 0.0);
  nodes_[loss.id].grad[0] = 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || !n.backward) continue;
    // The closure may append to nodes' gradients but never to the node list,
    // so the reference stays valid.
    n.backward(*this, n.grad);
  }
}

Var Tape::linear(Var x, Var w, Var b) {
  const Tensor& X = value(x);
  const Tensor& W = value(w);
  const Tensor& B = value(b);
  if (X.cols() != W.cols())
    throw ShapeError("linear: input width " + std::to_string(X.cols()) + " but weight is " +
                     W.shape_string());
  if (B.size() != W.rows()) throw ShapeError("linear: bias " + B.shape_string() + " vs weight " + W.shape_string());
  Tensor y = matmul_bt(X, W);
  for (std::size_t i = 0; i < y.rows(); ++i)
    for (std::size_t j = 0; j < y.cols(); ++j) y(i, j) += B[j];
  const std::size_t xi = x.id, wi = w.id, bi = b.id;
  return push(std::move(y), {xi, wi, bi}, [xi, wi, bi](Tape& t, const Tensor& g) {
    if (t.nodes_[xi].requires_grad) t.accumulate(xi, densiwae::matmul(g, t.nodes_[wi].value));
    if (t.nodes_[wi].requires_grad) t.accumulate(wi, matmul_at(g, t.nodes_[xi].value));
    if (t.nodes_[bi].requires_grad) {
      Tensor& gb = t.grad_buffer(bi);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) gb[j] += g(i, j);
    }
  });
}

Var Tape::matmul(Var a, Var b) {
  Tensor y = densiwae::matmul(value(a), value(b));
  const std::size_t ai = a.id, bi = b.id;
  return push(std::move(y), {ai, bi}, [ai, bi](Tape& t, const Tensor& g) {
    if (t.nodes_[ai].requires_grad) t.accumulate(ai, matmul_bt(g, t.nodes_[bi].value));
    if (t.nodes_[bi].requires_grad) t.accumulate(bi, matmul_at(t.nodes_[ai].value, g));
  });
}

Var Tape::add(Var a, Var b) {
  require_same(value(a), value(b), "add");
  Tensor y = value(a);
  y += value(b);
  const std::size_t ai = a.id, bi = b.id;
  return push(std::move(y), {ai, bi}, [ai, bi](Tape& t, const Tensor& g) {
    t.accumulate(ai, g);
    t.accumulate(bi, g);
  });
}

Var Tape::sub(Var a, Var b) {
  require_same(value(a), value(b), "sub");
  Tensor y = value(a);
  y -= value(b);
  const std::size_t ai = a.id, bi = b.id;
  return push(std::move(y), {ai, bi}, [ai, bi](Tape& t, const Tensor& g) {
    t.accumulate(ai, g);
    if (t.nodes_[bi].requires_grad) {
      Tensor ng = g;
      ng *= -1.0;
      t.accumulate(bi, ng);
    }
  });
}

Var Tape::mul(Var a, Var b) {
  require_same(value(a), value(b), "mul");
  Tensor y = value(a);
  const Tensor& B = value(b);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= B[i];
  const std::size_t ai = a.id, bi = b.id;
  return push(std::move(y), {ai, bi}, [ai, bi](Tape& t, const Tensor& g) {
    const Tensor& A = t.nodes_[ai].value;
    const Tensor& Bv = t.nodes_[bi].value;
    if (t.nodes_[ai].requires_grad) {
      Tensor& ga = t.grad_buffer(ai);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * Bv[i];
    }
    if (t.nodes_[bi].requires_grad) {
      Tensor& gb = t.grad_buffer(bi);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * A[i];
    }
  });
}

Var Tape::scale(Var a, double s) {
  Tensor y = value(a);
  y *= s;
  const std::size_t ai = a.id;
  return push(std::move(y), {ai}, [ai, s](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_buffer(ai);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += s * g[i];
  });
}

Var Tape::add_scalar(Var a, double s) {
  Tensor y = value(a);
  for (double& v : y.values()) v += s;
  const std::size_t ai = a.id;
  return push(std::move(y), {ai}, [ai](Tape& t, const Tensor& g) { t.accumulate(ai, g); });
}

template <class F>
Var Tape::unary(Var a, F&& f, std::function<double(double x, double y)> dfdx) {
  Tensor y = value(a);
  for (double& v : y.values()) v = f(v);
  const std::size_t ai = a.id;
  const std::size_t out = nodes_.size();
  return push(std::move(y), {ai}, [ai, out, dfdx = std::move(dfdx)](Tape& t, const Tensor& g) {
    const Tensor& x = t.nodes_[ai].value;
    const Tensor& yv = t.nodes_[out].value;
    Tensor& ga = t.grad_buffer(ai);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * dfdx(x[i], yv[i]);
  });
}

Var Tape::relu(Var a) {
  return unary(a, [](double x) { return x > 0 ? x : 0.0; },
               [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

Var Tape::sigmoid(Var a) {
  return unary(a, stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Var Tape::tanh(Var a) {
  return unary(a, [](double x) { return std::tanh(x); },
               [](double, double y) { return 1.0 - y * y; });
}

Var Tape::softplus(Var a) {
  return unary(a, stable_softplus, [](double x, double) { return stable_sigmoid(x); });
}

Var Tape::exp(Var a) {
  return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var Tape::square(Var a) {
  return unary(a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var Tape::sqrt(Var a) {
  for (double v : value(a).values())
    if (v < 0) throw NumericalError("sqrt of negative value on tape");
  return unary(a, [](double x) { return std::sqrt(x); },
               [](double, double y) { return y > 0 ? 0.5 / y : 0.0; });
}

Var Tape::groupsort(Var a, std::size_t group_size) {
  const Tensor& x = value(a);
  if (group_size == 0 || x.cols() % group_size != 0)
    throw ShapeError("groupsort: width " + std::to_string(x.cols()) +
                     " not divisible by group size " + std::to_string(group_size));
  Tensor y = x;
  // perm[i*cols + j] = source column feeding output column j of row i.
  std::vector<std::size_t> perm(x.size());
  std::vector<std::size_t> idx(group_size);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t g0 = 0; g0 < x.cols(); g0 += group_size) {
      std::iota(idx.begin(), idx.end(), g0);
      std::stable_sort(idx.begin(), idx.end(),
                       [&](std::size_t p, std::size_t q) { return x(r, p) > x(r, q); });
      for (std::size_t k = 0; k < group_size; ++k) {
        y(r, g0 + k) = x(r, idx[k]);
        perm[r * x.cols() + g0 + k] = idx[k];
      }
    }
  }
  const std::size_t ai = a.id;
  return push(std::move(y), {ai}, [ai, perm = std::move(perm)](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_buffer(ai);
    const std::size_t c = g.cols();
    for (std::size_t r = 0; r < g.rows(); ++r)
      for (std::size_t j = 0; j < c; ++j) ga(r, perm[r * c + j]) += g(r, j);
  });
}

Var Tape::sum(Var a) {
  double s = 0.0;
  for (double v : value(a).values()) s += v;
  const std::size_t ai = a.id;
  return push(Tensor::scalar(s), {ai}, [ai](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_buffer(ai);
    for (double& v : ga.values()) v += g[0];
  });
}

Var Tape::mean(Var a) {
  const double n = static_cast<double>(value(a).size());
  if (n == 0) throw ShapeError("mean of empty tensor");
  return scale(sum(a), 1.0 / n);
}

Var Tape::row_norms(Var a) {
  const Tensor& x = value(a);
  Tensor y = Tensor::matrix(x.rows(), 1);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double s = 0.0;
    for (double v : x.row(i)) s += v * v;
    y(i, 0) = std::sqrt(s);
  }
  const std::size_t ai = a.id;
  const std::size_t out = nodes_.size();
  return push(std::move(y), {ai}, [ai, out](Tape& t, const Tensor& g) {
    const Tensor& xv = t.nodes_[ai].value;
    const Tensor& nv = t.nodes_[out].value;
    Tensor& ga = t.grad_buffer(ai);
    for (std::size_t i = 0; i < xv.rows(); ++i) {
      if (nv(i, 0) == 0.0) continue;
      const double f = g(i, 0) / nv(i, 0);
      for (std::size_t j = 0; j < xv.cols(); ++j) ga(i, j) += f * xv(i, j);
    }
  });
}

Var Tape::pairwise_sqdist(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.cols() != B.cols())
    throw ShapeError("pairwise_sqdist: " + A.shape_string() + " vs " + B.shape_string());
  Tensor d = Tensor::matrix(A.rows(), B.rows());
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < B.rows(); ++j) d(i, j) = squared_distance(A.row(i), B.row(j));
  const std::size_t ai = a.id, bi = b.id;
  return push(std::move(d), {ai, bi}, [ai, bi](Tape& t, const Tensor& g) {
    const Tensor& Av = t.nodes_[ai].value;
    const Tensor& Bv = t.nodes_[bi].value;
    const std::size_t dim = Av.cols();
    const bool ga_on = t.nodes_[ai].requires_grad;
    const bool gb_on = t.nodes_[bi].requires_grad;
    // Same node on both sides: both contributions land in one buffer.
    Tensor& ga = t.grad_buffer(ai);
    Tensor& gb = t.grad_buffer(bi);
    for (std::size_t i = 0; i < Av.rows(); ++i) {
      for (std::size_t j = 0; j < Bv.rows(); ++j) {
        const double w = 2.0 * g(i, j);
        if (w == 0.0) continue;
        for (std::size_t k = 0; k < dim; ++k) {
          const double diff = w * (Av(i, k) - Bv(j, k));
          if (ga_on) ga(i, k) += diff;
          if (gb_on) gb(j, k) -= diff;
        }
      }
    }
  });
}

Var Tape::mean_offdiag(Var a) {
  const Tensor& x = value(a);
  if (x.rows() != x.cols() || x.rows() < 2)
    throw ShapeError("mean_offdiag needs a square matrix with at least 2 rows, got " + x.shape_string());
  const std::size_t n = x.rows();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) s += x(i, j);
  const double denom = static_cast<double>(n * (n - 1));
  const std::size_t ai = a.id;
  return push(Tensor::scalar(s / denom), {ai}, [ai, n, denom](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_buffer(ai);
    const double w = g[0] / denom;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) ga(i, j) += w;
  });
}

}  // namespace densiwae
