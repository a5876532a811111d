#pragma once

#include <stdexcept>
#include <string>

namespace densiwae {

/// Invalid arguments, shapes or configuration values. Maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dimension mismatch between operands.
class ShapeError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// NaN/Inf encountered or an iterative method failed. Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace densiwae
