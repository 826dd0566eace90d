#include <gtest/gtest.h>

#include <Eigen/LU>
#include <cmath>
#include <random>

#include "mdrf/baseline.hpp"

using namespace mdrf;

namespace {

using P1 = Point<1>;

GprHyper<1> hyper1(double l, double noise) {
  GprHyper<1> h;
  h.length_scale = {l};
  h.noise = noise;
  return h;
}

// Row-reduced dense solve with full pivoting, kept apart from the Cholesky path.
double dense_mean(const std::vector<double>& x, const std::vector<double>& y, double q, double l, double noise) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd K(n, n);
  Eigen::VectorXd k(n), yv(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double r = (x[i] - x[j]) / l;
      K(i, j) = std::exp(-0.5 * r * r) + (i == j ? noise : 0.0);
    }
    const double r = (q - x[i]) / l;
    k(i) = std::exp(-0.5 * r * r);
    yv(i) = y[i];
  }
  return k.dot(K.fullPivLu().solve(yv));
}

std::vector<Observation2> scattered(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Observation2> obs;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 q{u(rng), u(rng), u(rng)};
    const auto f = exact(q, TaylorGreenParams{});
    for (auto v : {f2::tau, f2::v, f2::w}) obs.push_back({q, v, f[v], 1.0});
  }
  return obs;
}

}  // namespace

TEST(Gpr, SinglePointInterpolates) {
  const GprVariable<1> gp({P1{0.3}}, {2.5}, hyper1(0.2, 0.0));
  const auto [m, v] = gp.predict(P1{0.3});
  EXPECT_NEAR(m, 2.5, 1e-14);
  EXPECT_NEAR(v, 0.0, 1e-14);
}

TEST(Gpr, FarFromDataReturnsPriorMean) {
  const GprVariable<1> gp({P1{0.0}, P1{0.1}, P1{0.2}}, {1.0, -2.0, 3.0}, hyper1(0.2, 1e-6));
  const auto [m, v] = gp.predict(P1{50.0});
  EXPECT_NEAR(m, 0.0, 1e-12);
  EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(Gpr, PressureWithoutDataIsNoData) {
  const auto obs = scattered(50, 1);
  EXPECT_THROW(gpr_fit(obs, {f2::tau, f2::p}, GprHyper<3>{}), NoData);
  const auto m = gpr_fit(obs, {f2::tau, f2::v, f2::w}, GprHyper<3>{});
  EXPECT_FALSE(m.has(f2::p));
  const std::vector<Point2> q{{0.5, 0.5, 0.5}};
  EXPECT_THROW(gpr_predict(m, f2::p, std::span<const Point2>(q)), NoData);
}

TEST(Gpr, NoiselessTrainingPointsAreExactWithZeroVariance) {
  std::vector<P1> x{P1{0.0}, P1{0.35}, P1{0.8}};
  const std::vector<double> y{1.0, -0.5, 0.25};
  const GprVariable<1> gp(x, y, hyper1(0.2, 0.0));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto [m, v] = gp.predict(x[i]);
    EXPECT_NEAR(m, y[i], 1e-12);
    EXPECT_NEAR(v, 0.0, 1e-12);
  }
}

TEST(Gpr, MidpointOfSymmetricPairIsAverage) {
  // Both training points get the same weight c = k(mid) / (1 + k12) at the
  // midpoint, so mean = 2c * avg(y). Noiseless with a long length scale,
  // 2c -> 1 and the mean is the plain average.
  const double l = 0.3, noise = 1e-6;
  const GprVariable<1> gp({P1{0.2}, P1{0.6}}, {3.0, -1.0}, hyper1(l, noise));
  const GprVariable<1> swap({P1{0.2}, P1{0.6}}, {-1.0, 3.0}, hyper1(l, noise));
  const double k12 = std::exp(-0.5 * (0.4 / l) * (0.4 / l)), km = std::exp(-0.5 * (0.2 / l) * (0.2 / l));
  const double two_c = 2.0 * km / (1.0 + k12 + noise);
  EXPECT_NEAR(gp.predict(P1{0.4}).first, two_c * 1.0, 1e-12);
  EXPECT_NEAR(swap.predict(P1{0.4}).first, gp.predict(P1{0.4}).first, 1e-12);
  const GprVariable<1> wide({P1{0.2}, P1{0.6}}, {3.0, -1.0}, hyper1(100.0, 0.0));
  EXPECT_NEAR(wide.predict(P1{0.4}).first, 1.0, 1e-5);
}

TEST(Gpr, MatchesDenseSolveOnFivePoints) {
  const std::vector<double> xs{0.05, 0.21, 0.4, 0.66, 0.9}, ys{0.3, -1.2, 0.8, 2.0, -0.4};
  std::vector<P1> x;
  for (double v : xs) x.push_back(P1{v});
  for (double noise : {1e-6, 1e-2}) {
    const GprVariable<1> gp(x, ys, hyper1(0.15, noise));
    for (double q = -0.2; q <= 1.2; q += 0.037) EXPECT_NEAR(gp.predict(P1{q}).first, dense_mean(xs, ys, q, 0.15, noise), 1e-10);
  }
}

TEST(Gpr, VarianceIsNonNegative) {
  const auto obs = scattered(200, 2);
  const auto m = gpr_fit(obs, {f2::tau}, GprHyper<3>(0.2, 1e-6));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.5, 1.5);
  for (int i = 0; i < 2000; ++i) EXPECT_GE(m.at(f2::tau).predict({u(rng), u(rng), u(rng)}).second, 0.0);
}

TEST(Gpr, DuplicatePointLeavesPredictionsUnchanged) {
  const std::vector<P1> x{P1{0.0}, P1{0.5}, P1{1.0}};
  const std::vector<double> y{1.0, -2.0, 0.5};
  auto xd = x;
  auto yd = y;
  xd.push_back(P1{0.5});
  yd.push_back(-2.0);
  const auto h = hyper1(0.3, 1e-10);
  const GprVariable<1> a(x, y, h), b(xd, yd, h);
  for (double q = -0.3; q <= 1.3; q += 0.01) EXPECT_NEAR(a.predict(P1{q}).first, b.predict(P1{q}).first, 1e-8);
}

TEST(Gpr, InvalidInputs) {
  EXPECT_THROW(GprVariable<1>({}, {}, hyper1(0.2, 1e-6)), NoData);
  EXPECT_THROW(GprVariable<1>({P1{0.0}}, {1.0}, hyper1(0.0, 1e-6)), InvalidArgument);
  auto h = hyper1(0.2, 1e-6);
  h.max_points = 2;
  EXPECT_THROW(GprVariable<1>({P1{0.0}, P1{1.0}, P1{2.0}}, {1.0, 1.0, 1.0}, h), InvalidArgument);
}

TEST(Gpr, IndefiniteMatrixIsNumericError) {
  // Two identical points and no jitter give a singular kernel matrix.
  EXPECT_THROW(GprVariable<1>({P1{0.4}, P1{0.4}}, {1.0, 1.0}, hyper1(0.2, 0.0)), NumericError);
}

TEST(Gpr, GridSearchPicksAFiniteCandidate) {
  const auto obs = scattered(150, 4);
  const auto h = gpr_grid_search(obs, {f2::tau, f2::v, f2::w}, {0.05, 0.2, 1.0}, {1e-6, 1e-3});
  EXPECT_TRUE(h.length_scale[0] == 0.05 || h.length_scale[0] == 0.2 || h.length_scale[0] == 1.0);
  // Smooth unit-period fields: the tiny length scale cannot win.
  EXPECT_NE(h.length_scale[0], 0.05);
}
