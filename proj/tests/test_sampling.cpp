#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "mdrf/sampling.hpp"

using namespace mdrf;
using physics::BoundaryTag;

TEST(Interior, GriddedUnitCubeIsCellCenters) {
  const auto s = sample_interior<3>(Domain2D(), 8, 0, SamplingMode::Gridded);
  ASSERT_EQ(s.size(), 8u);
  std::set<Point2> got(s.points.begin(), s.points.end());
  for (double x : {0.25, 0.75})
    for (double z : {0.25, 0.75})
      for (double t : {0.25, 0.75}) EXPECT_TRUE(got.count({x, z, t})) << x << " " << z << " " << t;
}

TEST(Interior, GriddedUsesLargestLatticeNotAboveN) {
  EXPECT_EQ(sample_interior<3>(Domain2D(), 26, 0, SamplingMode::Gridded).size(), 8u);
  EXPECT_EQ(sample_interior<3>(Domain2D(), 27, 0, SamplingMode::Gridded).size(), 27u);
  EXPECT_EQ(sample_interior<3>(Domain2D(), 1000, 0, SamplingMode::Gridded).size(), 1000u);
}

TEST(Interior, UniformIsDeterministicPerSeed) {
  const auto a = sample_interior<3>(Domain2D(), 1000, 17);
  const auto b = sample_interior<3>(Domain2D(), 1000, 17);
  const auto c = sample_interior<3>(Domain2D(), 1000, 18);
  EXPECT_EQ(a.points, b.points);
  EXPECT_NE(a.points, c.points);
}

TEST(Interior, UnitMeasureWeights) {
  const auto s = sample_interior<3>(Domain2D(), 1000, 1);
  ASSERT_EQ(s.weights.size(), 1000u);
  for (double w : s.weights) EXPECT_DOUBLE_EQ(w, 1e-3);
}

TEST(Interior, PointsStrictlyInside) {
  const Domain2D d(Interval(-1, 2), Interval(0, 0.5), Interval(3, 4));
  for (auto mode : {SamplingMode::UniformRandom, SamplingMode::Gridded}) {
    for (const auto& p : sample_interior<3>(d, 5000, 2, mode).points)
      for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_GT(p[k], d.axes[k].lower);
        EXPECT_LT(p[k], d.axes[k].upper);
      }
  }
}

TEST(Interior, ZeroCountIsInvalid) { EXPECT_THROW(sample_interior<3>(Domain2D(), 0, 1), InvalidArgument); }

TEST(Interior, SphericalPointsAvoidPoles) {
  const Domain3D d(Interval(-100, 0), Interval(0.0, kPi), Interval(0.0, 2 * kPi), Interval(0, 1));
  for (auto mode : {SamplingMode::UniformRandom, SamplingMode::Gridded}) {
    const auto s = sample_interior<4>(d, 20000, 3, mode);
    for (const auto& p : s.points) {
      EXPECT_GE(p[1], 1e-3);
      EXPECT_LE(p[1], kPi - 1e-3);
    }
    EXPECT_NEAR(s.total_weight(), d.measure(), 1e-9 * d.measure());
  }
}

TEST(Boundary2D, PiecesArePinnedAndTagged) {
  const Domain2D d;
  const auto b = sample_boundary(d, 4, 5);
  ASSERT_EQ(b.size(), 16u);
  std::set<BoundaryTag> tags(b.tags.begin(), b.tags.end());
  EXPECT_EQ(tags.size(), 4u);
  for (std::size_t i = 0; i < b.size(); ++i) {
    const auto& p = b.points[i];
    switch (b.tags[i]) {
      case BoundaryTag::Bottom: EXPECT_EQ(p[1], 0.0); break;
      case BoundaryTag::Surface: EXPECT_EQ(p[1], 1.0); break;
      case BoundaryTag::Lateral: EXPECT_TRUE(p[0] == 0.0 || p[0] == 1.0); break;
      case BoundaryTag::Initial: EXPECT_EQ(p[2], 0.0); break;
    }
  }
}

TEST(Boundary2D, PieceWeightsSumToPieceMeasure) {
  const Domain2D d(Interval(0, 2), Interval(0, 3), Interval(0, 5));
  const auto b = sample_boundary(d, 50, 6);
  std::map<BoundaryTag, double> sum;
  for (std::size_t i = 0; i < b.size(); ++i) {
    EXPECT_GT(b.weights[i], 0.0);
    sum[b.tags[i]] += b.weights[i];
  }
  EXPECT_NEAR(sum[BoundaryTag::Surface], 2.0 * 5.0, 1e-12);
  EXPECT_NEAR(sum[BoundaryTag::Bottom], 2.0 * 5.0, 1e-12);
  EXPECT_NEAR(sum[BoundaryTag::Lateral], 2 * 3.0 * 5.0, 1e-12);
  EXPECT_NEAR(sum[BoundaryTag::Initial], 2.0 * 3.0, 1e-12);
}

TEST(Boundary2D, DeterministicAndZeroInvalid) {
  EXPECT_EQ(sample_boundary(Domain2D(), 10, 3).points, sample_boundary(Domain2D(), 10, 3).points);
  EXPECT_THROW(sample_boundary(Domain2D(), 0, 3), InvalidArgument);
}

TEST(Boundary3D, RegionalBoxHasFourLateralFaces) {
  const Domain3D d(Interval(-500, 0), Interval(1.0, 2.0), Interval(0.5, 1.5), Interval(0, 1));
  const auto b = sample_boundary(d, 40, 7);
  int theta_face = 0, phi_face = 0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const auto& p = b.points[i];
    switch (b.tags[i]) {
      case BoundaryTag::Surface: EXPECT_EQ(p[0], 0.0); break;
      case BoundaryTag::Bottom: EXPECT_EQ(p[0], -500.0); break;
      case BoundaryTag::Initial: EXPECT_EQ(p[3], 0.0); break;
      case BoundaryTag::Lateral:
        if (p[1] == 1.0 || p[1] == 2.0) ++theta_face;
        if (p[2] == 0.5 || p[2] == 1.5) ++phi_face;
        break;
    }
  }
  EXPECT_EQ(theta_face, 20);
  EXPECT_EQ(phi_face, 20);
}

TEST(Boundary3D, PeriodicLongitudeHasOnlyLatitudeFaces) {
  const Domain3D d(Interval(-500, 0), Interval(0.5, 2.5), Interval(0.0, 2 * kPi), Interval(0, 1));
  const auto b = sample_boundary(d, 10, 8);
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b.tags[i] == BoundaryTag::Lateral) {
      EXPECT_TRUE(b.points[i][1] == 0.5 || b.points[i][1] == 2.5);
    }
  }
}

TEST(Quadrature, ConstantIntegratesToMeasure) {
  const Domain2D d(Interval(0, 2), Interval(-1, 1), Interval(0, 0.5));
  for (std::size_t n : {1u, 7u, 1000u}) EXPECT_NEAR(sample_interior<3>(d, n, 1).total_weight(), d.measure(), 1e-12);
}

TEST(Quadrature, MonteCarloErrorDecaysAsInverseSqrtN) {
  // f = exp(x) z^2 cos(t) on the unit box; exact integral (e - 1)/3 sin 1.
  const double exact = (std::exp(1.0) - 1.0) / 3.0 * std::sin(1.0);
  std::vector<double> log_n, log_err;
  for (std::size_t n : {100u, 1000u, 10000u}) {
    double mse = 0.0;
    const int reps = 40;
    for (int r = 0; r < reps; ++r) {
      const auto s = sample_interior<3>(Domain2D(), n, 1000 + static_cast<std::uint64_t>(r));
      double q = 0.0;
      for (std::size_t i = 0; i < s.size(); ++i) {
        const auto& p = s.points[i];
        q += s.weights[i] * std::exp(p[0]) * p[1] * p[1] * std::cos(p[2]);
      }
      mse += (q - exact) * (q - exact) / reps;
    }
    log_n.push_back(std::log(static_cast<double>(n)));
    log_err.push_back(0.5 * std::log(mse));
  }
  const double slope = (log_err[2] - log_err[0]) / (log_n[2] - log_n[0]);
  EXPECT_NEAR(slope, -0.5, 0.15);
}
