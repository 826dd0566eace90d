#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mdrf/network.hpp"

using namespace mdrf;

namespace {

// Sum of (d_in + 1) * d_out over every affine map, counted layer by layer.
std::size_t count_by_layers(const NetworkSpec& s) {
  std::size_t n = (s.input_dim + 1) * s.shared_width;
  for (const auto& sub : s.subnets) {
    std::size_t in = s.shared_width;
    for (std::size_t k = 2; k <= sub.depth; ++k) {
      const std::size_t out = k == sub.depth ? 1 : sub.width;
      n += (in + 1) * out;
      in = out;
    }
  }
  return n + s.pde_param_names.size();
}

std::vector<double> at(const ModelParams& p, std::vector<double> q) { return forward(p, q); }

}  // namespace

TEST(Network, DefaultParameterCountMatchesLayerCount) {
  const auto spec = NetworkSpec::default_2d();
  const auto p = init(spec, 42);
  EXPECT_EQ(p.size(), count_by_layers(spec));
  EXPECT_EQ(p.size(), 166150u);
  EXPECT_EQ(parameter_count(spec), p.size());
  EXPECT_EQ(init(NetworkSpec::default_3d(), 1).size(), count_by_layers(NetworkSpec::default_3d()));
}

TEST(Network, ParameterCountMatchesForRandomSpecs) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<std::size_t> w(1, 9), d(2, 6);
  for (int trial = 0; trial < 200; ++trial) {
    auto spec = trial % 2 ? NetworkSpec::default_2d(w(rng)) : NetworkSpec::default_3d(w(rng));
    spec.shared_width = w(rng);
    for (auto& s : spec.subnets) {
      s.depth = d(rng);
      s.width = w(rng);
    }
    EXPECT_EQ(parameter_count(spec), count_by_layers(spec));
    EXPECT_EQ(ModelParams(spec).size(), count_by_layers(spec));
  }
}

TEST(Network, UnknownCoefficientsStartAtZero) {
  const auto p = init(NetworkSpec::default_2d(), 42);
  ASSERT_EQ(p.pde_params().size(), 2u);
  EXPECT_EQ(p.pde_params()[0], 0.0);
  EXPECT_EQ(p.pde_params()[1], 0.0);
  EXPECT_EQ(p.pde_param("zeta"), 0.0);
  EXPECT_EQ(p.pde_param("zeta_tau"), 0.0);
  EXPECT_THROW((void)p.pde_param("eta"), InvalidArgument);
}

TEST(Network, InitIsDeterministic) {
  const auto a = init(NetworkSpec::default_2d(16), 5);
  const auto b = init(NetworkSpec::default_2d(16), 5);
  const auto c = init(NetworkSpec::default_2d(16), 6);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, c.values);
}

TEST(Network, InitBiasesZeroWeightsWithinGlorotBound) {
  const auto p = init(NetworkSpec::default_2d(16), 3);
  auto check = [&](const AffineSlot& s) {
    const double a = std::sqrt(6.0 / static_cast<double>(s.in + s.out));
    for (std::size_t i = 0; i < s.in * s.out; ++i) EXPECT_LE(std::fabs(p.values[s.w_offset + i]), a);
    for (std::size_t i = 0; i < s.out; ++i) EXPECT_EQ(p.values[s.b_offset + i], 0.0);
  };
  check(p.layout.shared());
  for (std::size_t j = 0; j < 4; ++j)
    for (const auto& s : p.layout.subnet(j)) check(s);
}

TEST(Network, ZeroWeightsGiveZeroFields) {
  const ModelParams p(NetworkSpec::default_3d(8));
  for (double v : at(p, {0.1, -0.5, 0.9, 0.0})) EXPECT_EQ(v, 0.0);
}

TEST(Network, SharedUnitPassThrough) {
  auto spec = NetworkSpec::default_2d(3);
  for (auto& s : spec.subnets) s.depth = 2;
  ModelParams p(spec);
  const auto& sh = p.layout.shared();
  const double w0[3] = {0.4, -1.1, 0.25};
  for (std::size_t i = 0; i < 3; ++i) p.values[sh.w_offset + i] = w0[i];
  p.values[sh.b_offset] = 0.3;
  p.values[p.layout.subnet(1)[0].w_offset] = 1.0;
  const std::vector<double> q{0.2, 0.7, -0.6};
  const auto out = at(p, q);
  EXPECT_DOUBLE_EQ(out[1], std::tanh(0.4 * 0.2 - 1.1 * 0.7 - 0.25 * 0.6 + 0.3));
  EXPECT_EQ(out[0], 0.0);
  EXPECT_EQ(out[2], 0.0);
  EXPECT_EQ(out[3], 0.0);
}

TEST(Network, GoldenValuesSeed7) {
  const auto p = init(NetworkSpec::default_2d(), 7);
  const auto out = at(p, {0.1, -0.2, 0.3});
  const double golden[4] = {0.13250041164105555, 0.028622364503543531, 0.012512901133454931,
                            -0.014895576419153102};
  for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(out[j], golden[j], 1e-12);
}

TEST(Network, SubnetsAreIndependentAboveSharedLayer) {
  const auto base = init(NetworkSpec::default_3d(12), 11);
  const std::vector<double> q{-0.3, 0.2, 0.8, -0.9};
  const auto ref = at(base, q);
  for (std::size_t j = 0; j < 6; ++j) {
    auto p = base;
    const auto [b, e] = p.layout.subnet_range(j);
    for (std::size_t i = b; i < e; ++i) p.values[i] += 0.01 * static_cast<double>(i % 7 + 1);
    const auto out = at(p, q);
    for (std::size_t k = 0; k < 6; ++k) {
      if (k == j)
        EXPECT_NE(out[k], ref[k]);
      else
        EXPECT_EQ(out[k], ref[k]);
    }
  }
}

TEST(Network, OutputBoundedByLastLayerWeights) {
  // The final affine map sees tanh activations in (-1, 1), so
  // |out - bias| <= sum |w|.
  auto p = init(NetworkSpec::default_2d(10), 4);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 3.0);
  for (std::size_t i = 0; i < p.layout.network_size(); ++i) p.values[i] = g(rng);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int n = 0; n < 200; ++n) {
    const auto out = at(p, {u(rng), u(rng), u(rng)});
    for (std::size_t j = 0; j < 4; ++j) {
      const auto& last = p.layout.subnet(j).back();
      double bound = 0.0;
      for (std::size_t i = 0; i < last.in; ++i) bound += std::fabs(p.values[last.w_offset + i]);
      EXPECT_LT(std::fabs(out[j] - p.values[last.b_offset]), bound);
    }
  }
}

TEST(Network, NonFiniteParameterIsNumericError) {
  auto p = init(NetworkSpec::default_2d(4), 1);
  p.values[3] = std::nan("");
  EXPECT_THROW(at(p, {0.0, 0.0, 0.0}), NumericError);
}

TEST(Network, SpecValidation) {
  auto s = NetworkSpec::default_2d(4);
  s.subnets[2].depth = 1;
  EXPECT_THROW(ParamLayout{s}, InvalidArgument);
  s = NetworkSpec::default_2d(4);
  s.subnets.pop_back();
  EXPECT_THROW(ParamLayout{s}, InvalidArgument);
  s = NetworkSpec::default_2d(4);
  s.subnets[0].width = 0;
  EXPECT_THROW(ParamLayout{s}, InvalidArgument);
  s = NetworkSpec::default_3d(4);
  s.input_dim = 3;
  EXPECT_THROW(ParamLayout{s}, InvalidArgument);
}

TEST(Density, ReferenceStateGivesRho0) {
  const StateReference ref{};
  EXPECT_DOUBLE_EQ(density_from_state(ref.tau0, ref.sigma0, 2e-4, 8e-4, ref), ref.rho0);
}

TEST(Density, Examples) {
  EXPECT_DOUBLE_EQ(density_from_state(11.0, 35.0, 0.2, 0.0, StateReference{1000.0, 10.0, 35.0}), 800.0);
  EXPECT_NEAR(density_from_state(15.0, 34.0, 2e-4, 8e-4, StateReference{1025.0, 10.0, 35.0}), 1023.155, 1e-9);
}
