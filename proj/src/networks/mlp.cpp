#include "densiwae/networks/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "densiwae/error.hpp"
#include "densiwae/random.hpp"

namespace densiwae {

namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

void apply_hidden(Tensor& y, const HiddenActivation& act) {
  switch (act.kind) {
    case Activation::relu:
      for (double& v : y.values()) v = v > 0 ? v : 0.0;
      break;
    case Activation::groupsort:
      y = groupsort(y, act.group_size);
      break;
    case Activation::sigmoid:
      for (double& v : y.values()) v = sigmoid(v);
      break;
    case Activation::tanh:
      for (double& v : y.values()) v = std::tanh(v);
      break;
    case Activation::linear:
      break;
  }
}

}  // namespace

MlpSpec MlpSpec::uniform(std::vector<std::size_t> widths, HiddenActivation act, OutputTransform out) {
  MlpSpec s;
  s.widths = std::move(widths);
  if (s.widths.size() >= 2) s.activations.assign(s.widths.size() - 2, act);
  s.output = out;
  return s;
}

void MlpSpec::validate() const {
  if (widths.size() < 2) throw ConfigError("MlpSpec needs at least input and output widths");
  for (auto w : widths)
    if (w == 0) throw ConfigError("MlpSpec widths must be positive");
  if (activations.size() != widths.size() - 2)
    throw ConfigError("MlpSpec has " + std::to_string(activations.size()) +
                      " activations for " + std::to_string(widths.size() - 2) + " hidden layers");
  for (std::size_t i = 0; i < activations.size(); ++i) {
    const auto& a = activations[i];
    if (a.kind == Activation::groupsort &&
        (a.group_size == 0 || widths[i + 1] % a.group_size != 0))
      throw ConfigError("groupsort grouping " + std::to_string(a.group_size) +
                        " does not divide hidden width " + std::to_string(widths[i + 1]));
  }
  if (output == OutputTransform::affine_rescale && !(hi > lo))
    throw ConfigError("affine rescale needs hi > lo");
}

std::vector<Tensor*> Mlp::parameters() {
  std::vector<Tensor*> p;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    p.push_back(&weights[i]);
    p.push_back(&biases[i]);
  }
  return p;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) n += weights[i].size() + biases[i].size();
  return n;
}

Mlp zero_mlp(const MlpSpec& spec) {
  spec.validate();
  Mlp m;
  m.spec = spec;
  for (std::size_t i = 0; i + 1 < spec.widths.size(); ++i) {
    m.weights.push_back(Tensor::matrix(spec.widths[i + 1], spec.widths[i]));
    m.biases.push_back(Tensor::matrix(1, spec.widths[i + 1]));
  }
  return m;
}

Mlp build_mlp(const MlpSpec& spec, std::uint64_t seed) {
  Mlp m = zero_mlp(spec);
  Rng rng = make_rng(seed);
  for (std::size_t i = 0; i < m.weights.size(); ++i) {
    const double fan_in = static_cast<double>(spec.widths[i]);
    const double fan_out = static_cast<double>(spec.widths[i + 1]);
    const bool feeds_relu = i < spec.activations.size() && spec.activations[i].kind == Activation::relu;
    const double limit = feeds_relu ? std::sqrt(6.0 / fan_in) : std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (double& v : m.weights[i].values()) v = u(rng);
  }
  return m;
}

Tensor groupsort(const Tensor& x, std::size_t group_size) {
  if (group_size == 0 || x.cols() % group_size != 0)
    throw ShapeError("groupsort: width " + std::to_string(x.cols()) +
                     " not divisible by group size " + std::to_string(group_size));
  Tensor y = x;
  for (std::size_t r = 0; r < y.rows(); ++r) {
    auto row = y.row(r);
    for (std::size_t g = 0; g < row.size(); g += group_size)
      std::sort(row.begin() + static_cast<std::ptrdiff_t>(g),
                row.begin() + static_cast<std::ptrdiff_t>(g + group_size), std::greater<>());
  }
  return y;
}

Tensor forward(const Mlp& mlp, const Tensor& batch) {
  if (batch.cols() != mlp.spec.input_width())
    throw ShapeError("forward: batch width " + std::to_string(batch.cols()) +
                     " but network input width is " + std::to_string(mlp.spec.input_width()));
  Tensor h = batch;
  for (std::size_t i = 0; i < mlp.weights.size(); ++i) {
    Tensor y = matmul_bt(h, mlp.weights[i]);
    const Tensor& b = mlp.biases[i];
    for (std::size_t r = 0; r < y.rows(); ++r)
      for (std::size_t c = 0; c < y.cols(); ++c) y(r, c) += b[c];
    if (i < mlp.spec.activations.size()) apply_hidden(y, mlp.spec.activations[i]);
    h = std::move(y);
  }
  switch (mlp.spec.output) {
    case OutputTransform::identity:
      break;
    case OutputTransform::affine_rescale: {
      const double lo = mlp.spec.lo, span = mlp.spec.hi - mlp.spec.lo;
      for (double& v : h.values()) v = lo + span * sigmoid(v);
      break;
    }
    case OutputTransform::softplus:
      for (double& v : h.values()) v = softplus(v);
      break;
  }
  return h;
}

std::vector<Tensor> MlpBinding::gradients(const Tape& tape) const {
  std::vector<Tensor> g;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    g.push_back(tape.grad(weights[i]));
    g.push_back(tape.grad(biases[i]));
  }
  return g;
}

MlpBinding bind(Tape& tape, const Mlp& mlp, bool trainable) {
  MlpBinding b;
  for (std::size_t i = 0; i < mlp.weights.size(); ++i) {
    b.weights.push_back(trainable ? tape.parameter(mlp.weights[i]) : tape.constant(mlp.weights[i]));
    b.biases.push_back(trainable ? tape.parameter(mlp.biases[i]) : tape.constant(mlp.biases[i]));
  }
  return b;
}

Var forward(Tape& tape, const Mlp& mlp, const MlpBinding& binding, Var batch) {
  if (tape.value(batch).cols() != mlp.spec.input_width())
    throw ShapeError("forward: batch width " + std::to_string(tape.value(batch).cols()) +
                     " but network input width is " + std::to_string(mlp.spec.input_width()));
  Var h = batch;
  for (std::size_t i = 0; i < binding.weights.size(); ++i) {
    h = tape.linear(h, binding.weights[i], binding.biases[i]);
    if (i < mlp.spec.activations.size()) {
      const auto& a = mlp.spec.activations[i];
      switch (a.kind) {
        case Activation::relu: h = tape.relu(h); break;
        case Activation::groupsort: h = tape.groupsort(h, a.group_size); break;
        case Activation::sigmoid: h = tape.sigmoid(h); break;
        case Activation::tanh: h = tape.tanh(h); break;
        case Activation::linear: break;
      }
    }
  }
  switch (mlp.spec.output) {
    case OutputTransform::identity:
      break;
    case OutputTransform::affine_rescale:
      h = tape.add_scalar(tape.scale(tape.sigmoid(h), mlp.spec.hi - mlp.spec.lo), mlp.spec.lo);
      break;
    case OutputTransform::softplus:
      h = tape.softplus(h);
      break;
  }
  return h;
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::groupsort: return "groupsort";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
    case Activation::linear: return "linear";
  }
  return "unknown";
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "groupsort") return Activation::groupsort;
  if (s == "sigmoid") return Activation::sigmoid;
  if (s == "tanh") return Activation::tanh;
  if (s == "linear") return Activation::linear;
  throw ConfigError("unknown activation '" + s + "'");
}

}  // namespace densiwae
