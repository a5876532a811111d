#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "densiwae/autodiff/tape.hpp"
#include "densiwae/autodiff/tensor.hpp"

namespace densiwae {

enum class Activation : std::uint32_t { relu = 0, groupsort = 1, sigmoid = 2, tanh = 3, linear = 4 };

enum class OutputTransform : std::uint32_t { identity = 0, affine_rescale = 1, softplus = 2 };

struct HiddenActivation {
  Activation kind = Activation::relu;
  std::size_t group_size = 2;  // groupsort only
};

/// Architecture of a fully connected network.
///
/// widths = [N_0, ..., N_{L+1}]: N_0 is the input width and N_{L+1} the output
/// width. There is one activation per hidden layer (widths.size() - 2 of them);
/// the last affine map is followed by the output transform only.
/// affine_rescale maps to (lo, hi) through a scaled sigmoid.
struct MlpSpec {
  std::vector<std::size_t> widths;
  std::vector<HiddenActivation> activations;
  OutputTransform output = OutputTransform::identity;
  double lo = 0.0;
  double hi = 1.0;

  /// Same activation on every hidden layer.
  static MlpSpec uniform(std::vector<std::size_t> widths, HiddenActivation act,
                         OutputTransform out = OutputTransform::identity);

  std::size_t input_width() const { return widths.front(); }
  std::size_t output_width() const { return widths.back(); }
  std::size_t layer_count() const { return widths.size() - 1; }
  void validate() const;
};

/// weights[i] has shape N_{i+1} x N_i, biases[i] has shape 1 x N_{i+1}.
struct Mlp {
  MlpSpec spec;
  std::vector<Tensor> weights;
  std::vector<Tensor> biases;

  /// Parameter pointers in (w0, b0, w1, b1, ...) order.
  std::vector<Tensor*> parameters();
  std::size_t parameter_count() const;
};

/// He-uniform init for layers feeding a ReLU, Xavier-uniform otherwise.
Mlp build_mlp(const MlpSpec& spec, std::uint64_t seed);

/// Zero-initialised network, mostly for hand-set weights in tests.
Mlp zero_mlp(const MlpSpec& spec);

/// Batch forward pass; row i of the result is the network applied to row i.
Tensor forward(const Mlp& mlp, const Tensor& batch);

/// Sort each consecutive group of group_size entries in descending order.
Tensor groupsort(const Tensor& x, std::size_t group_size);

/// Tape leaves for one network's parameters.
struct MlpBinding {
  std::vector<Var> weights;
  std::vector<Var> biases;

  std::vector<Tensor> gradients(const Tape& tape) const;
};

MlpBinding bind(Tape& tape, const Mlp& mlp, bool trainable = true);
Var forward(Tape& tape, const Mlp& mlp, const MlpBinding& binding, Var batch);

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

}  // namespace densiwae
