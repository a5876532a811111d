#include "densiwae/networks/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "densiwae/error.hpp"

namespace densiwae {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr std::array<char, 8> kMagic{'D', 'W', 'A', 'E', 'M', 'L', 'P', '1'};
constexpr std::uint64_t kMaxWidth = 1u << 24;

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ConfigError("checkpoint truncated");
  return v;
}

}  // namespace

void write_mlp(std::ostream& out, const Mlp& mlp) {
  const auto& s = mlp.spec;
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.widths.size()));
  for (auto w : s.widths) put<std::uint64_t>(out, w);
  for (const auto& a : s.activations) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(a.kind));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(a.group_size));
  }
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.output));
  put<double>(out, s.lo);
  put<double>(out, s.hi);
  for (std::size_t i = 0; i < mlp.weights.size(); ++i) {
    for (double v : mlp.weights[i].values()) put<double>(out, v);
    for (double v : mlp.biases[i].values()) put<double>(out, v);
  }
  if (!out) throw ConfigError("checkpoint write failed");
}

Mlp read_mlp(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in) throw ConfigError("checkpoint truncated");
  if (magic != kMagic) throw ConfigError("checkpoint magic mismatch");

  MlpSpec s;
  const auto count = get<std::uint32_t>(in);
  if (count < 2 || count > 1024) throw ConfigError("checkpoint has implausible layer count " + std::to_string(count));
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto w = get<std::uint64_t>(in);
    if (w == 0 || w > kMaxWidth) throw ConfigError("checkpoint has implausible width " + std::to_string(w));
    s.widths.push_back(static_cast<std::size_t>(w));
  }
  for (std::uint32_t i = 0; i + 2 < count; ++i) {
    const auto code = get<std::uint32_t>(in);
    const auto group = get<std::uint32_t>(in);
    if (code > static_cast<std::uint32_t>(Activation::linear))
      throw ConfigError("checkpoint has unknown activation code " + std::to_string(code));
    s.activations.push_back({static_cast<Activation>(code), group});
  }
  const auto out_code = get<std::uint32_t>(in);
  if (out_code > static_cast<std::uint32_t>(OutputTransform::softplus))
    throw ConfigError("checkpoint has unknown output transform code " + std::to_string(out_code));
  s.output = static_cast<OutputTransform>(out_code);
  s.lo = get<double>(in);
  s.hi = get<double>(in);

  Mlp m = zero_mlp(s);
  for (std::size_t i = 0; i < m.weights.size(); ++i) {
    for (double& v : m.weights[i].values()) v = get<double>(in);
    for (double& v : m.biases[i].values()) v = get<double>(in);
  }
  return m;
}

void save_mlp(const std::string& path, const Mlp& mlp) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  write_mlp(f, mlp);
}

Mlp load_mlp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path + "'");
  return read_mlp(f);
}

}  // namespace densiwae
