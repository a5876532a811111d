#include <doctest.h>

#include <limits>

#include <cmath>
#include <sstream>

#include "densiwae/divergences/transport.hpp"
#include "densiwae/error.hpp"
#include "densiwae/networks/architectures.hpp"
#include "densiwae/networks/checkpoint.hpp"
#include "densiwae/networks/constraints.hpp"
#include "densiwae/networks/linear_map.hpp"
#include "densiwae/networks/mlp.hpp"
#include "support.hpp"

using namespace densiwae;
using testing::gaussian_matrix;
using testing::uniform_matrix;

namespace {

Tensor rotation2(double angle) { return Tensor::from_rows({{std::cos(angle), -std::sin(angle)}, {std::sin(angle), std::cos(angle)}}); }

}  // namespace

TEST_CASE("groupsort examples") {
  CHECK(groupsort(Tensor::from_rows({{3, -1}}), 2) == Tensor::from_rows({{3, -1}}));
  CHECK(groupsort(Tensor::from_rows({{-1, 3}}), 2) == Tensor::from_rows({{3, -1}}));
  CHECK(groupsort(Tensor::from_rows({{1, 3, -2, 0}}), 2) == Tensor::from_rows({{3, 1, 0, -2}}));
  CHECK_THROWS(groupsort(Tensor::from_rows({{1, 2, 3}}), 2));
}

TEST_CASE("groupsort permutes within each group") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t g = 1 + trial % 4;
    const Tensor x = uniform_matrix(3, 4 * g, rng);
    const Tensor y = groupsort(x, g);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (std::size_t start = 0; start < x.cols(); start += g) {
        std::vector<double> a(x.row(r).begin() + start, x.row(r).begin() + start + g);
        std::vector<double> b(y.row(r).begin() + start, y.row(r).begin() + start + g);
        CHECK(std::is_sorted(b.begin(), b.end(), std::greater<>()));
        std::sort(a.begin(), a.end(), std::greater<>());
        CHECK(a == b);
      }
    }
  }
}

TEST_CASE("architecture specs") {
  const HiddenActivation relu{Activation::relu, 2};
  const MlpSpec enc = five_gaussian_encoder_spec(2, relu, OutputTransform::identity);
  CHECK(enc.widths == std::vector<std::size_t>{3, 32, 32, 32, 2});
  CHECK(enc.layer_count() == 4);
  const Mlp net = build_encoder(enc, 1);
  CHECK(net.weights.size() == 4);
  CHECK(net.weights[0].shape() == std::vector<std::size_t>{32, 3});
  CHECK(net.biases[3].shape() == std::vector<std::size_t>{1, 2});

  const MlpSpec mnist = mnist_encoder_spec(8, relu, OutputTransform::identity);
  CHECK(mnist.widths == std::vector<std::size_t>{784, 512, 256, 128, 64, 8});
  const MlpSpec mdec = mnist_decoder_spec(8, relu);
  CHECK(mdec.widths == std::vector<std::size_t>{8, 64, 128, 256, 512, 784});
  CHECK(mdec.output == OutputTransform::affine_rescale);

  const MlpSpec gs = five_gaussian_encoder_spec(2, {Activation::groupsort, 2}, OutputTransform::identity);
  for (const auto& a : gs.activations) CHECK(a.kind == Activation::groupsort);
  CHECK(discriminator_spec(2).widths == std::vector<std::size_t>{2, 64, 64, 64, 1});

  MlpSpec bad = MlpSpec::uniform({3, 5, 2}, {Activation::groupsort, 2}, OutputTransform::identity);
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(build_mlp(bad, 0), ConfigError);
  MlpSpec short_spec;
  short_spec.widths = {3};
  CHECK_THROWS_AS(short_spec.validate(), ConfigError);
}

TEST_CASE("output transforms reach the latent support") {
  std::mt19937_64 rng(5);
  const Tensor x = uniform_matrix(50, 3, rng, -5, 5);
  const Mlp beta = build_mlp(MlpSpec::uniform({3, 8, 2}, {Activation::relu, 2}, OutputTransform::affine_rescale), 2);
  const Mlp expo = build_mlp(MlpSpec::uniform({3, 8, 2}, {Activation::relu, 2}, OutputTransform::softplus), 2);
  const Tensor zb = forward(beta, x), ze = forward(expo, x);
  for (double v : zb.values()) CHECK((v >= 0.0 && v <= 1.0));
  for (double v : ze.values()) CHECK(v > 0.0);
}

TEST_CASE("constrain_norms examples") {
  MlpSpec spec = MlpSpec::uniform({2, 2, 2}, {Activation::relu, 2}, OutputTransform::identity);
  Mlp net = zero_mlp(spec);
  net.weights[0] = Tensor::from_rows({{0.5, 0}, {0, 0.25}});
  net.weights[1] = Tensor::from_rows({{4, 0}, {0, 1}});
  const Mlp out = constrain_norms(net, NormKind::spectral, 1.0);
  CHECK(out.weights[0] == net.weights[0]);
  CHECK(out.weights[1](0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(out.weights[1](1, 1) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(out.weights[1](0, 1) == 0.0);

  const Tensor row = project_matrix(Tensor::from_rows({{3, 3}, {0.5, -0.5}}), NormKind::inf, 2.0);
  CHECK(row(0, 0) == doctest::Approx(1.0));
  CHECK(row(0, 1) == doctest::Approx(1.0));
  CHECK(row(1, 0) == 0.5);
  CHECK(row(1, 1) == -0.5);
  CHECK(operator_norm(Tensor::from_rows({{3, -4}}), NormKind::two_inf) == doctest::Approx(5.0));
  CHECK_THROWS_AS(constrain_norms(net, NormKind::spectral, 0.0), ConfigError);
}

TEST_CASE("projected norms never exceed the bound") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const Tensor m = uniform_matrix(4, 5, rng, -3, 3);
    for (NormKind k : {NormKind::spectral, NormKind::inf, NormKind::two_inf}) {
      const double bound = 0.5 + trial * 0.1;
      CHECK(operator_norm(project_matrix(m, k, bound), k) <= bound * (1 + 1e-6));
    }
  }
}

TEST_CASE("constrained groupsort network is empirically 1-Lipschitz") {
  MlpSpec spec = MlpSpec::uniform({3, 16, 16, 2}, {Activation::groupsort, 2}, OutputTransform::identity);
  const Mlp net = constrain_lipschitz(build_mlp(spec, 21), 1.0);
  std::mt19937_64 rng(22);
  const Tensor x = uniform_matrix(1000, 3, rng, -3, 3);
  const Tensor y = uniform_matrix(1000, 3, rng, -3, 3);
  const Tensor fx = forward(net, x), fy = forward(net, y);
  for (std::size_t i = 0; i < 1000; ++i) CHECK(distance(fx.row(i), fy.row(i)) <= (1 + 1e-6) * distance(x.row(i), y.row(i)));
}

TEST_CASE("JL distortion") {
  std::mt19937_64 rng(30);
  const Tensor pts = gaussian_matrix(20, 2, rng);
  const Distortion id = distortion(LinearMap{Tensor::from_rows({{1, 0}, {0, 1}}), 0}, pts);
  CHECK(id.min_ratio == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(id.max_ratio == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(id.pairs == 190);

  const Distortion rot = distortion(LinearMap{rotation2(0.7), 0}, pts);
  CHECK(std::abs(rot.min_ratio - 1.0) < 1e-12);
  CHECK(std::abs(rot.max_ratio - 1.0) < 1e-12);

  Tensor dup = Tensor::from_rows({{1, 1}, {1, 1}, {2, 0}});
  CHECK(distortion(LinearMap{rotation2(0.3), 0}, dup).pairs == 2);

  CHECK(jl_dimension(100, 0.5) == 19);
}

// With k = ceil(log n / eps^2) the spread bound holds for only a few seeds;
// the constant in k is too small. Kept at the stated rate and allowed to fail.
TEST_CASE("JL projection keeps the distortion spread below (1+eps)/(1-eps)" * doctest::may_fail()) {
  const double eps = 0.5;
  const std::size_t k = jl_dimension(100, eps);
  int good = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::mt19937_64 prng(seed + 1000);
    const Tensor p = gaussian_matrix(100, 50, prng);
    const LinearMap map = jl_projection(50, k, seed);
    CHECK(map.matrix.shape() == std::vector<std::size_t>{k, 50});
    const Distortion dd = distortion(map, p);
    if (dd.max_ratio / dd.min_ratio <= (1 + eps) / (1 - eps)) ++good;
  }
  CHECK(good >= 45);
}

TEST_CASE("JL distortion spread shrinks as k grows") {
  std::mt19937_64 prng(4);
  const Tensor p = gaussian_matrix(100, 50, prng);
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t k : {5, 19, 50, 400}) {
    double spread = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Distortion dd = distortion(jl_projection(50, k, seed), p);
      spread += dd.max_ratio / dd.min_ratio / 10.0;
    }
    CHECK(spread < previous);
    previous = spread;
  }
  CHECK(previous < 1.5);
}

TEST_CASE("memorizing decoder") {
  SUBCASE("single atom is a constant map") {
    const Tensor atom = Tensor::from_rows({{0.3, -1.2}});
    const MemorizingDecoder dec = build_memorizing_decoder(atom, 2, 0.05, 1);
    std::mt19937_64 rng(2);
    const Tensor out = decode(dec, gaussian_matrix(30, 2, rng));
    for (std::size_t i = 0; i < out.rows(); ++i) CHECK(distance(out.row(i), atom.row(0)) == 0.0);
    CHECK(w1_exact(out, atom) == 0.0);
  }
  SUBCASE("two atoms on the line with a uniform latent") {
    const Tensor atoms = Tensor::from_rows({{0.0}, {1.0}});
    const LatentSampler uniform = [](std::size_t count, Rng& rng) {
      std::uniform_real_distribution<double> u(0, 1);
      Tensor t = Tensor::matrix(count, 1);
      for (auto& v : t.storage()) v = u(rng);
      return t;
    };
    const MemorizingDecoder dec = build_memorizing_decoder(atoms, 1, 0.05, 3, uniform);
    CHECK(dec.network.spec.widths == std::vector<std::size_t>{1, 2, 1});
    // Sorted-difference oracle against the quantiles of the uniform law on {0, 1}.
    const Tensor out = decode(dec, dec.reference);
    std::vector<double> y(out.values().begin(), out.values().end());
    std::sort(y.begin(), y.end());
    double w1 = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) w1 += std::abs(y[i] - (2 * i < y.size() ? 0.0 : 1.0));
    w1 /= static_cast<double>(y.size());
    CHECK(w1 <= 0.05);
  }
  SUBCASE("five atoms in R^3 from a 2D gaussian latent") {
    std::mt19937_64 rng(4);
    const Tensor atoms = gaussian_matrix(5, 3, rng);
    const MemorizingDecoder dec = build_memorizing_decoder(atoms, 2, 0.05, 5);
    CHECK(w1_exact(decode(dec, dec.reference), atoms) <= 0.05);
  }
}

TEST_CASE("memorizing decoder stays within epsilon on random atom sets") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed + 50);
    const std::size_t n = 1 + seed * 5;
    const std::size_t d = 2 + seed % 2;
    const Tensor atoms = gaussian_matrix(n, d, rng);
    const MemorizingDecoder dec = build_memorizing_decoder(atoms, 2, 0.05, seed);
    const Tensor pushed = decode(dec, dec.reference);
    CAPTURE(seed);
    CHECK(w1_exact(pushed, atoms) <= 0.05);
    const Tensor via_net = forward(dec.network, dec.reference);
    for (std::size_t i = 0; i < pushed.size(); ++i) CHECK(via_net[i] == doctest::Approx(pushed[i]).epsilon(1e-9));
  }
  CHECK_THROWS_AS(build_memorizing_decoder(Tensor::from_rows({{0.0}}), 1, 0.0, 0), ConfigError);
}

TEST_CASE("relu capacity bound") {
  // (20 - 3) / 2 * floor(17 / 12) * floor(4 / 2) + 2
  CHECK(relu_capacity_bound(20, 4, 2) == doctest::Approx(19.0));
  CHECK(relu_capacity_bound(3, 4, 2) == 0.0);
}

TEST_CASE("checkpoint round trip") {
  MlpSpec spec = MlpSpec::uniform({3, 6, 4, 2}, {Activation::groupsort, 2}, OutputTransform::affine_rescale);
  spec.lo = -1;
  spec.hi = 3;
  spec.activations[1] = {Activation::tanh, 2};
  const Mlp net = build_mlp(spec, 77);
  std::stringstream buf;
  write_mlp(buf, net);
  const std::string bytes = buf.str();
  CHECK(bytes.substr(0, 8) == "DWAEMLP1");
  std::stringstream in(bytes);
  const Mlp back = read_mlp(in);
  CHECK(back.spec.widths == spec.widths);
  CHECK(back.spec.output == spec.output);
  CHECK(back.spec.lo == -1.0);
  CHECK(back.spec.hi == 3.0);
  CHECK(back.spec.activations[1].kind == Activation::tanh);
  for (std::size_t i = 0; i < net.weights.size(); ++i) {
    CHECK(back.weights[i] == net.weights[i]);
    CHECK(back.biases[i] == net.biases[i]);
  }

  std::stringstream truncated(bytes.substr(0, bytes.size() - 5));
  CHECK_THROWS_AS(read_mlp(truncated), ConfigError);
  std::string wrong = bytes;
  wrong[0] = 'X';
  std::stringstream bad_magic(wrong);
  CHECK_THROWS_AS(read_mlp(bad_magic), ConfigError);
  CHECK_THROWS_AS(load_mlp("/nonexistent/file.bin"), ConfigError);
}
