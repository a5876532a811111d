#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "densiwae/autodiff/tape.hpp"
#include "densiwae/autodiff/tensor.hpp"
#include "densiwae/random.hpp"

namespace testing {

using densiwae::Tape;
using densiwae::Tensor;
using densiwae::Var;

inline Tensor uniform_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double lo = -2.0, double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t = Tensor::matrix(r, c);
  for (auto& v : t.storage()) v = u(rng);
  return t;
}

inline Tensor gaussian_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double mean = 0.0, double sd = 1.0) {
  std::normal_distribution<double> g(mean, sd);
  Tensor t = Tensor::matrix(r, c);
  for (auto& v : t.storage()) v = g(rng);
  return t;
}

// Builds a scalar loss from the inputs on a fresh tape.
using ScalarFn = std::function<Var(Tape&, const std::vector<Var>&)>;

// Largest |analytic - numeric| over all input entries, divided by the
// largest magnitude of either gradient (floored at 1e-8).
inline double gradient_error(const ScalarFn& f, std::vector<Tensor> inputs, double step = 1e-5) {
  std::vector<Tensor> analytic;
  {
    Tape tape;
    std::vector<Var> vars;
    for (const auto& t : inputs) vars.push_back(tape.parameter(t));
    const Var loss = f(tape, vars);
    tape.backward(loss);
    for (const auto& v : vars) analytic.push_back(tape.grad(v));
  }
  auto eval = [&](const std::vector<Tensor>& in) {
    Tape tape;
    std::vector<Var> vars;
    for (const auto& t : in) vars.push_back(tape.constant(t));
    return tape.value(f(tape, vars)).item();
  };
  double worst = 0.0, scale = 1e-8;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      const double keep = inputs[k][i];
      inputs[k][i] = keep + step;
      const double up = eval(inputs);
      inputs[k][i] = keep - step;
      const double down = eval(inputs);
      inputs[k][i] = keep;
      const double numeric = (up - down) / (2.0 * step);
      worst = std::max(worst, std::abs(numeric - analytic[k][i]));
      scale = std::max({scale, std::abs(numeric), std::abs(analytic[k][i])});
    }
  }
  return worst / scale;
}

// Random linear functional of a node: sum(out * weights).
inline Var probe(Tape& tape, Var out, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Tensor& v = tape.value(out);
  return tape.sum(tape.mul(out, tape.constant(uniform_matrix(v.rows(), v.cols(), rng, -1.0, 1.0))));
}

}  // namespace testing
