#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "densiwae/autodiff/tensor.hpp"

namespace densiwae {

/// Handle to a node recorded on a Tape.
struct Var {
  std::size_t id = 0;
};

/// Reverse-mode tape. Nodes are appended in evaluation order, so the node
/// list is topologically sorted by construction and backward() is a single
/// reverse sweep.
///
/// Non-differentiable points use the zero subgradient (relu at 0, norms and
/// sqrt at 0); groupsort breaks ties by original position.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  Var constant(Tensor value);
  Var parameter(Tensor value);

  const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
  /// Gradient of the last backward() loss with respect to v (zeros if v does
  /// not influence the loss).
  const Tensor& grad(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  /// Runs the reverse sweep from a scalar (1x1) loss node.
  void backward(Var loss);

  // Affine layer: x (n x p), w (q x p), b (1 x q) -> x w^T + b.
  Var linear(Var x, Var w, Var b);
  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double s);
  Var add_scalar(Var a, double s);

  Var relu(Var a);
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var softplus(Var a);
  Var exp(Var a);
  Var square(Var a);
  Var sqrt(Var a);
  Var groupsort(Var a, std::size_t group_size);

  Var sum(Var a);
  Var mean(Var a);
  /// Euclidean norm of each row, shape n x 1.
  Var row_norms(Var a);
  /// Squared Euclidean distances between rows of a (n x d) and b (m x d).
  Var pairwise_sqdist(Var a, Var b);
  /// Mean of the off-diagonal entries of a square matrix.
  Var mean_offdiag(Var a);

 private:
  using Backward = std::function<void(Tape&, const Tensor& out_grad)>;

  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    std::vector<std::size_t> parents;
    Backward backward;
  };

  Var push(Tensor value, std::vector<std::size_t> parents, Backward backward);
  bool needs(Var v) const { return nodes_[v.id].requires_grad; }
  Tensor& grad_buffer(std::size_t id);
  void accumulate(std::size_t id, const Tensor& g);
  template <class F>
  Var unary(Var a, F&& f, std::function<double(double x, double y)> dfdx);

  std::vector<Node> nodes_;
};

}  // namespace densiwae
