#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mdrf/io.hpp"
#include "mdrf/oracle.hpp"

using namespace mdrf;

TEST(Exact, QuarterPoint) {
  const auto f = exact({0.25, 0.25, 0.0}, TaylorGreenParams{});
  EXPECT_NEAR(f[f2::tau], 1.0, 1e-15);
  EXPECT_NEAR(f[f2::v], 0.0, 1e-15);
  EXPECT_NEAR(f[f2::w], 0.0, 1e-15);
  EXPECT_NEAR(f[f2::p], -0.25, 1e-15);
}

TEST(Exact, EighthPoint) {
  const auto f = exact({0.125, 0.125, 0.0}, TaylorGreenParams{});
  EXPECT_NEAR(f[f2::v], -0.5, 1e-15);
  EXPECT_NEAR(f[f2::w], 0.5, 1e-15);
  EXPECT_NEAR(f[f2::tau], std::sqrt(2.0) / 2.0, 1e-15);
  EXPECT_NEAR(f[f2::p], std::sqrt(2.0) / (4.0 * kPi), 1e-15);
  EXPECT_NEAR(f[f2::p], 0.11254, 5e-6);
}

TEST(Exact, VelocityDecayAtUnitTime) {
  // w at (0, 0.25, t) is the bare velocity decay factor exp(-4 pi^2 (eta + zeta) t);
  // 4 p at (0, 0.25, t) is its square.
  const TaylorGreenParams tg{0.01, 0.01, 0.02};
  const double decay = exact({0.0, 0.25, 1.0}, tg)[f2::w];
  EXPECT_NEAR(decay, std::exp(-0.08 * kPi * kPi), 1e-15);
  EXPECT_NEAR(decay, 0.45404, 5e-6);
  const double squared = 4.0 * exact({0.0, 0.25, 1.0}, tg)[f2::p];
  EXPECT_NEAR(squared, std::exp(-0.16 * kPi * kPi), 1e-15);
  EXPECT_NEAR(squared, 0.20615, 5e-6);
}

TEST(Exact, VelocityDependsOnlyOnEtaPlusZeta) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Point2 q{u(rng), u(rng), u(rng)};
    const auto a = exact(q, {0.005, 0.015, 0.02});
    const auto b = exact(q, {0.015, 0.005, 0.02});
    EXPECT_NEAR(a[f2::v], b[f2::v], 1e-15);
    EXPECT_NEAR(a[f2::w], b[f2::w], 1e-15);
  }
}

TEST(Exact, VelocityIndependentOfZetaTau) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Point2 q{u(rng), u(rng), u(rng)};
    const auto a = exact(q, {0.01, 0.01, 0.02});
    const auto b = exact(q, {0.01, 0.01, 0.7 * u(rng)});
    EXPECT_EQ(a[f2::v], b[f2::v]);
    EXPECT_EQ(a[f2::w], b[f2::w]);
  }
}

TEST(Exact, ContinuityAndHydrostaticByHand) {
  const TaylorGreenParams tg{};
  const double k = 2.0 * kPi;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double x = u(rng), z = u(rng), t = u(rng);
    const double d = std::exp(-2.0 * k * kPi * (tg.eta + tg.zeta) * t);
    const double dt = std::exp(-2.0 * k * kPi * tg.zeta_tau * t);
    const double v_x = -k * std::cos(k * x) * std::cos(k * z) * d;
    const double w_z = k * std::cos(k * x) * std::cos(k * z) * d;
    const double p_z = -std::sin(k * z) * dt;
    const auto f = exact({x, z, t}, tg);
    EXPECT_LE(std::fabs(v_x + w_z), 1e-10);
    EXPECT_LE(std::fabs(p_z + f[f2::tau]), 1e-10);
  }
}

TEST(Exact, FiniteDifferenceIdentities) {
  const TaylorGreenParams tg{};
  const double h = 1e-5;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int i = 0; i < 200; ++i) {
    const double x = u(rng), z = u(rng), t = u(rng);
    const double v_x = (exact({x + h, z, t}, tg)[f2::v] - exact({x - h, z, t}, tg)[f2::v]) / (2 * h);
    const double w_z = (exact({x, z + h, t}, tg)[f2::w] - exact({x, z - h, t}, tg)[f2::w]) / (2 * h);
    const double p_z = (exact({x, z + h, t}, tg)[f2::p] - exact({x, z - h, t}, tg)[f2::p]) / (2 * h);
    EXPECT_NEAR(v_x + w_z, 0.0, 1e-8);
    EXPECT_NEAR(p_z, -exact({x, z, t}, tg)[f2::tau], 1e-8);
  }
}

TEST(Observations, NoiselessValuesMatchExact) {
  ObservationSpec os;
  os.n = 500;
  os.seed = 11;
  const TaylorGreenParams tg{};
  const auto obs = generate_observations(os, tg);
  ASSERT_EQ(obs.size(), 1500u);
  for (const auto& o : obs) {
    EXPECT_NEAR(o.value, exact(o.point, tg)[o.var], 1e-15);
    EXPECT_EQ(o.weight, 1.0);
  }
}

TEST(Observations, DefaultVariablesWithholdPressure) {
  const auto obs = generate_observations(ObservationSpec{}, TaylorGreenParams{});
  for (const auto& o : obs) EXPECT_NE(o.var, f2::p);
  ASSERT_EQ(obs.size(), 3000u);
  EXPECT_EQ(obs[0].var, f2::tau);
  EXPECT_EQ(obs[1].var, f2::v);
  EXPECT_EQ(obs[2].var, f2::w);
  EXPECT_EQ(obs[0].point, obs[2].point);
}

TEST(Observations, CsvIsByteIdenticalAcrossRuns) {
  ObservationSpec os;
  os.seed = 99;
  const auto a = io::write_observations(generate_observations(os, TaylorGreenParams{}));
  const auto b = io::write_observations(generate_observations(os, TaylorGreenParams{}));
  EXPECT_EQ(a, b);
  os.seed = 100;
  EXPECT_NE(a, io::write_observations(generate_observations(os, TaylorGreenParams{})));
}

TEST(Observations, NoiseHasRequestedSpread) {
  ObservationSpec os;
  os.n = 20000;
  os.variables = {f2::tau};
  os.noise_sd = 0.1;
  const TaylorGreenParams tg{};
  double s = 0.0, s2 = 0.0;
  const auto obs = generate_observations(os, tg);
  for (const auto& o : obs) {
    const double e = o.value - exact(o.point, tg)[o.var];
    s += e;
    s2 += e * e;
  }
  const double n = static_cast<double>(obs.size());
  EXPECT_NEAR(s / n, 0.0, 5 * 0.1 / std::sqrt(n));
  EXPECT_NEAR(std::sqrt(s2 / n), 0.1, 0.003);
}

TEST(Observations, MaskAndSubdomain) {
  ObservationSpec os;
  os.n = 2000;
  os.mask = {RoundedRect{0.3, 0.3, 0.2, 0.1, 0.05}, RoundedRect{0.75, 0.7, 0.1, 0.2, 0.08}};
  const auto obs = generate_observations(os, TaylorGreenParams{});
  for (const auto& o : obs) {
    const bool in = os.mask[0].contains(o.point[0], o.point[1]) || os.mask[1].contains(o.point[0], o.point[1]);
    EXPECT_TRUE(in);
  }
  // Corner of the first rectangle is cut by the rounding.
  EXPECT_FALSE(os.mask[0].contains(0.3 - 0.2 + 1e-4, 0.3 - 0.1 + 1e-4));
  EXPECT_TRUE(os.mask[0].contains(0.3, 0.3 - 0.1 + 1e-4));
}

TEST(Observations, InvalidArguments) {
  ObservationSpec os;
  os.variables.clear();
  EXPECT_THROW(generate_observations(os, {}), InvalidArgument);
  os = ObservationSpec{};
  os.n = 0;
  EXPECT_THROW(generate_observations(os, {}), InvalidArgument);
  os = ObservationSpec{};
  os.noise_sd = -1.0;
  EXPECT_THROW(generate_observations(os, {}), InvalidArgument);
}

TEST(Synthetic3D, ObservationsInsideDomainAndPaired) {
  ObservationSpec3D os;
  os.n = 300;
  const auto obs = generate_observations_3d(os);
  ASSERT_EQ(obs.size(), 1200u);
  const SyntheticOcean ocean;
  for (const auto& o : obs) {
    for (std::size_t k = 0; k < 4; ++k) {
      EXPECT_GE(o.point[k], os.domain.axes[k].lower);
      EXPECT_LE(o.point[k], os.domain.axes[k].upper);
    }
    EXPECT_EQ(o.value, ocean(o.point)[o.var]);
  }
  os.variables = {f3::tau, f3::v_theta};
  EXPECT_THROW(generate_observations_3d(os), InvalidArgument);
}
