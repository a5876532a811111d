#include "densiwae/autodiff/optimizer.hpp"

#include <cmath>

#include "densiwae/error.hpp"

namespace densiwae {

OptimizerState make_optimizer(const OptimizerConfig& config, std::span<Tensor* const> params) {
  if (!(config.learning_rate > 0)) throw ConfigError("learning rate must be positive");
  if (config.beta1 < 0 || config.beta1 >= 1 || config.beta2 < 0 || config.beta2 >= 1)
    throw ConfigError("Adam betas must lie in [0, 1)");
  OptimizerState s;
  s.config = config;
  for (const Tensor* p : params) {
    s.first_moment.emplace_back(p->shape(), 0.0);
    s.second_moment.emplace_back(p->shape(), 0.0);
  }
  return s;
}

double global_norm(std::span<const Tensor> grads) {
  double s = 0.0;
  for (const auto& g : grads)
    for (double v : g.values()) s += v * v;
  return std::sqrt(s);
}

void step(std::span<Tensor* const> params, std::span<const Tensor> grads, OptimizerState& state) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size())
    throw ShapeError("optimizer step: parameter/gradient count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i]->same_shape(grads[i]) || !params[i]->same_shape(state.first_moment[i]))
      throw ShapeError("optimizer step: shape mismatch at parameter " + std::to_string(i));
    if (!grads[i].all_finite())
      throw NumericalError("non-finite gradient for parameter " + std::to_string(i) +
                           " at optimizer step " + std::to_string(state.steps + 1));
  }

  double factor = 1.0;
  if (state.config.clip_norm) {
    const double norm = global_norm(grads);
    if (norm > *state.config.clip_norm) factor = *state.config.clip_norm / norm;
  }

  ++state.steps;
  const auto& c = state.config;
  if (c.kind == OptimizerKind::sgd) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto p = params[i]->values();
      auto g = grads[i].values();
      for (std::size_t k = 0; k < p.size(); ++k) p[k] -= c.learning_rate * factor * g[k];
    }
    return;
  }

  const double t = static_cast<double>(state.steps);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i]->values();
    auto g = grads[i].values();
    auto m = state.first_moment[i].values();
    auto v = state.second_moment[i].values();
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double gk = factor * g[k];
      m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * gk;
      v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * gk * gk;
      const double mhat = m[k] / bc1;
      const double vhat = v[k] / bc2;
      p[k] -= c.learning_rate * mhat / (std::sqrt(vhat) + c.epsilon);
    }
  }
}

}  // namespace densiwae
