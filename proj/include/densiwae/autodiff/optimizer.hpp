#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "densiwae/autodiff/tensor.hpp"

namespace densiwae {

enum class OptimizerKind { sgd, adam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Global gradient-norm clip; off unless set.
  std::optional<double> clip_norm;
};

struct OptimizerState {
  OptimizerConfig config;
  std::uint64_t steps = 0;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
};

OptimizerState make_optimizer(const OptimizerConfig& config, std::span<Tensor* const> params);

/// Applies one update in place. Throws NumericalError on a non-finite
/// gradient, leaving the parameters untouched.
void step(std::span<Tensor* const> params, std::span<const Tensor> grads, OptimizerState& state);

double global_norm(std::span<const Tensor> grads);

}  // namespace densiwae
