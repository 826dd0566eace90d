#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mdrf/geometry.hpp"

using namespace mdrf;

TEST(Interval, RejectsEmptyOrReversed) {
  EXPECT_THROW(Interval(1.0, 1.0), InvalidArgument);
  EXPECT_THROW(Interval(2.0, 1.0), InvalidArgument);
  EXPECT_THROW(Interval(0.0, INFINITY), InvalidArgument);
}

TEST(Normalizer, MapsExamplePoints) {
  const Domain2D d(Interval(0, 1), Interval(0, 1), Interval(0, 2));
  const Normalizer<3> n(d);
  EXPECT_DOUBLE_EQ(n.normalize({0.5, 0.5, 1.0})[0], 0.0);
  EXPECT_DOUBLE_EQ(n.normalize({1.0, 0.5, 1.0})[0], 1.0);
  EXPECT_DOUBLE_EQ(n.normalize({0.5, 0.5, 0.5})[2], -0.5);
}

TEST(Normalizer, OutsidePointThrows) {
  const Normalizer<3> n{Domain2D()};
  EXPECT_THROW(n.normalize({1.5, 0.5, 0.5}), OutOfDomain);
  EXPECT_THROW(n.normalize({0.5, -0.1, 0.5}), OutOfDomain);
}

TEST(Normalizer, OutputInUnitCube) {
  const Domain3D d;
  const Normalizer<4> n(d);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    Point3 p;
    for (std::size_t k = 0; k < 4; ++k)
      p[k] = std::uniform_real_distribution<double>(d.axes[k].lower, d.axes[k].upper)(rng);
    for (double c : n.normalize(p)) {
      EXPECT_GE(c, -1.0 - 1e-15);
      EXPECT_LE(c, 1.0 + 1e-15);
    }
  }
}

TEST(Normalizer, RoundTripOnRandomPoints) {
  const Domain3D d(Interval(-2000.0, 0.0), Interval(0.2, 2.9), Interval(0.0, 6.0), Interval(0.0, 365.0));
  const Normalizer<4> n(d);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const Point3 q{u(rng), u(rng), u(rng), u(rng)};
    const Point3 back = n.normalize_unchecked(n.denormalize(q));
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(back[k], q[k], 1e-12 * std::max(1.0, std::fabs(q[k])));
    const Point3 p = n.denormalize(q);
    const Point3 again = n.denormalize(n.normalize(p));
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(again[k], p[k], 1e-12 * std::max(1.0, std::fabs(p[k])));
  }
}

TEST(Domain3D, RejectsOutOfRangeAngles) {
  EXPECT_THROW(Domain3D(Interval(-10, 0), Interval(0, 4), Interval(0, 1), Interval(0, 1)), InvalidArgument);
  EXPECT_THROW(Domain3D(Interval(-10, 5), Interval(0, 1), Interval(0, 1), Interval(0, 1)), InvalidArgument);
  EXPECT_THROW(Domain3D(Interval(-10, 0), Interval(0, 1), Interval(0, 7), Interval(0, 1)), InvalidArgument);
}

TEST(Rotation, NorthPoleQuarterTurnLandsOnPrimeMeridianEquator) {
  for (double phi : {0.0, 1.0, 4.0}) {
    const auto [th, ph] = Rotation(kPi / 2).rotate(0.0, phi);
    EXPECT_NEAR(th, kPi / 2, 1e-12);
    EXPECT_NEAR(ph, 0.0, 1e-12);
  }
}

TEST(Rotation, ZeroAngleIsIdentity) {
  const Rotation r(0.0);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const double th = std::uniform_real_distribution<double>(0.0, kPi)(rng);
    const double ph = std::uniform_real_distribution<double>(0.0, 2 * kPi)(rng);
    const auto [a, b] = r.rotate(th, ph);
    EXPECT_EQ(a, th);
    EXPECT_EQ(b, ph);
  }
}

TEST(Rotation, RoundTrip) {
  const Rotation r(0.7);
  const auto [a, b] = r.rotate(1.1, 2.2);
  const auto [th, ph] = r.unrotate(a, b);
  EXPECT_NEAR(th, 1.1, 1e-12);
  EXPECT_NEAR(ph, 2.2, 1e-12);
  const auto [c, d] = r.inverse().rotate(a, b);
  EXPECT_NEAR(c, 1.1, 1e-12);
  EXPECT_NEAR(d, 2.2, 1e-12);
}

TEST(Rotation, OutputRangesAndDistancesPreserved) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ut(0.0, kPi), up(0.0, 2 * kPi), ua(-kPi, kPi);
  for (int i = 0; i < 2000; ++i) {
    const Rotation r(ua(rng));
    const double t1 = ut(rng), p1 = up(rng), t2 = ut(rng), p2 = up(rng);
    const auto [a1, b1] = r.rotate(t1, p1);
    const auto [a2, b2] = r.rotate(t2, p2);
    EXPECT_GE(a1, 0.0);
    EXPECT_LE(a1, kPi);
    EXPECT_GE(b1, 0.0);
    EXPECT_LT(b1, 2 * kPi);
    EXPECT_NEAR(great_circle(a1, b1, a2, b2), great_circle(t1, p1, t2, p2), 1e-12);
  }
}

TEST(Rotation, PreservesNorm) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int i = 0; i < 1000; ++i) {
    const Rotation r(g(rng));
    const Vec3 v{g(rng), g(rng), g(rng)};
    const Vec3 w = r.apply(v);
    const double nv = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    const double nw = std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
    EXPECT_NEAR(nw, nv, 1e-12 * nv);
    const Vec3 back = r.apply_inverse(w);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(back[k], v[k], 1e-12 * nv);
  }
}

TEST(Rotation, TangentMapPreservesLengthAndInverts) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> ut(0.3, kPi - 0.3), up(0.0, 2 * kPi), uv(-1.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const Rotation r(0.9);
    const double th = ut(rng), ph = up(rng), vt = uv(rng), vp = uv(rng);
    const auto [tr, pr] = r.rotate(th, ph);
    if (std::sin(tr) < 1e-3) continue;
    const auto [a, b] = r.rotate_tangent(th, ph, vt, vp);
    EXPECT_NEAR(std::hypot(a, b), std::hypot(vt, vp), 1e-12);
    const auto [c, d] = r.unrotate_tangent(tr, pr, a, b);
    EXPECT_NEAR(c, vt, 1e-10);
    EXPECT_NEAR(d, vp, 1e-10);
  }
}

TEST(RotationSchedule, EvenSpacingStartingAtIdentity) {
  ASSERT_EQ(rotation_schedule(1).size(), 1u);
  EXPECT_EQ(rotation_schedule(1)[0].angle(), 0.0);
  const auto two = rotation_schedule(2);
  EXPECT_EQ(two[0].angle(), 0.0);
  EXPECT_DOUBLE_EQ(two[1].angle(), kPi / 2);
  const auto four = rotation_schedule(4);
  const double want[] = {0.0, kPi / 4, kPi / 2, 3 * kPi / 4};
  for (std::size_t k = 0; k < 4; ++k) EXPECT_DOUBLE_EQ(four[k].angle(), want[k]);
  for (std::size_t n = 1; n < 10; ++n) EXPECT_EQ(rotation_schedule(n).front().angle(), 0.0);
}

TEST(RotationSchedule, ZeroIsInvalid) { EXPECT_THROW(rotation_schedule(0), InvalidArgument); }
