#pragma once

#include <iosfwd>
#include <string>

#include "densiwae/networks/mlp.hpp"

namespace densiwae {

/// Flat little-endian layout:
///   char[8]  "DWAEMLP1"
///   u32      number of widths W
///   u64[W]   widths
///   per hidden layer: u32 activation code, u32 group size
///   u32      output transform code
///   f64      lo, f64 hi
///   per layer: f64 weights (row-major, N_{i+1} x N_i), then f64 biases
void write_mlp(std::ostream& out, const Mlp& mlp);
Mlp read_mlp(std::istream& in);

void save_mlp(const std::string& path, const Mlp& mlp);
Mlp load_mlp(const std::string& path);

}  // namespace densiwae
