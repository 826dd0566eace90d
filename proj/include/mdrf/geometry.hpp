#pragma once

// Equation domains, coordinate normalization and the prime-meridian rotation
// family used by the rotated-chart ensemble.
//
// Coordinate conventions
//   2D mode: (x, z, t), dimensionless.
//   3D mode: (r_a, theta, phi, t) with r_a = r - r_e <= 0 the vertical
//            coordinate relative to the sea surface, theta the polar angle
//            (colatitude, 0 at the north pole) and phi the azimuth in
//            [0, 2*pi). Storing r_a instead of r keeps full precision for
//            depths that are tiny compared with the Earth radius.

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mdrf/errors.hpp"

namespace mdrf {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kEarthRadius = 6.371e6;  // metres

/// A coordinate in an equation domain. D = 3 in 2D mode, 4 in 3D mode.
template <std::size_t D>
using Point = std::array<double, D>;

using Point2 = Point<3>;  // x, z, t
using Point3 = Point<4>;  // r_a, theta, phi, t

struct Interval {
  double lower = 0.0;
  double upper = 1.0;

  Interval() = default;
  Interval(double lo, double hi) : lower(lo), upper(hi) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
      std::ostringstream os;
      os << "interval [" << lo << ", " << hi << "] must satisfy lower < upper";
      throw InvalidArgument(os.str());
    }
  }

  bool operator==(const Interval&) const = default;

  double length() const noexcept { return upper - lower; }
  double mid() const noexcept { return 0.5 * (lower + upper); }
  bool contains(double v, double tol = 0.0) const noexcept {
    return v >= lower - tol && v <= upper + tol;
  }
};

/// Box domain in D coordinates; the last coordinate is always time.
template <std::size_t D>
struct BoxDomain {
  std::array<Interval, D> axes;

  double measure() const noexcept {
    double m = 1.0;
    for (const auto& a : axes) m *= a.length();
    return m;
  }

  bool contains(const Point<D>& p, double rel_tol = 1e-12) const noexcept {
    for (std::size_t k = 0; k < D; ++k) {
      if (!axes[k].contains(p[k], rel_tol * axes[k].length())) return false;
    }
    return true;
  }
};

/// x, z, t. Defaults to the unit box, which holds one full period of the
/// Taylor-Green vortex in each spatial direction.
struct Domain2D : BoxDomain<3> {
  Domain2D() { axes = {Interval(0, 1), Interval(0, 1), Interval(0, 1)}; }
  Domain2D(Interval x, Interval z, Interval t) { axes = {x, z, t}; }

  const Interval& x() const { return axes[0]; }
  const Interval& z() const { return axes[1]; }
  const Interval& t() const { return axes[2]; }
};

/// r_a, theta, phi, t.
struct Domain3D : BoxDomain<4> {
  Domain3D() {
    axes = {Interval(-1000.0, 0.0), Interval(0.1, kPi - 0.1),
            Interval(0.0, 2.0 * kPi - 1e-9), Interval(0, 1)};
  }
  Domain3D(Interval ra, Interval theta, Interval phi, Interval t) {
    axes = {ra, theta, phi, t};
    validate();
  }

  const Interval& ra() const { return axes[0]; }
  const Interval& theta() const { return axes[1]; }
  const Interval& phi() const { return axes[2]; }
  const Interval& t() const { return axes[3]; }

  void validate() const {
    if (ra().upper > 0.0) throw InvalidArgument("r_a range must lie at or below the surface (r_a <= 0)");
    if (theta().lower < 0.0 || theta().upper > kPi)
      throw InvalidArgument("theta range must lie within [0, pi]");
    if (phi().lower < 0.0 || phi().upper > 2.0 * kPi)
      throw InvalidArgument("phi range must lie within [0, 2*pi)");
  }
};

/// Per-coordinate affine map from a box domain onto [-1, 1]^D.
template <std::size_t D>
class Normalizer {
 public:
  Normalizer() = default;
  explicit Normalizer(const BoxDomain<D>& domain) : domain_(domain) {
    for (std::size_t k = 0; k < D; ++k) {
      scale_[k] = 2.0 / domain.axes[k].length();
      offset_[k] = -1.0 - scale_[k] * domain.axes[k].lower;
    }
  }

  /// Throws OutOfDomain when `p` is outside the box (relative slack 1e-12).
  Point<D> normalize(const Point<D>& p) const {
    if (!domain_.contains(p)) {
      std::ostringstream os;
      os << "point (";
      for (std::size_t k = 0; k < D; ++k) os << (k ? ", " : "") << p[k];
      os << ") lies outside the normalizer domain";
      throw OutOfDomain(os.str());
    }
    return normalize_unchecked(p);
  }

  Point<D> normalize_unchecked(const Point<D>& p) const noexcept {
    Point<D> out;
    for (std::size_t k = 0; k < D; ++k) out[k] = scale_[k] * p[k] + offset_[k];
    return out;
  }

  Point<D> denormalize(const Point<D>& q) const noexcept {
    Point<D> out;
    for (std::size_t k = 0; k < D; ++k) out[k] = (q[k] - offset_[k]) / scale_[k];
    return out;
  }

  /// d(normalized_k) / d(physical_k).
  const std::array<double, D>& scale() const noexcept { return scale_; }
  const std::array<double, D>& offset() const noexcept { return offset_; }
  const BoxDomain<D>& domain() const noexcept { return domain_; }

 private:
  BoxDomain<D> domain_{};
  std::array<double, D> scale_{};
  std::array<double, D> offset_{};
};

// --- rotations -------------------------------------------------------------

using Vec3 = std::array<double, 3>;

inline Vec3 unit_vector(double theta, double phi) noexcept {
  const double s = std::sin(theta);
  return {s * std::cos(phi), s * std::sin(phi), std::cos(theta)};
}

/// Inverse of unit_vector; phi wrapped to [0, 2*pi).
inline std::pair<double, double> spherical_angles(const Vec3& n) noexcept {
  const double rho = std::hypot(n[0], n[1]);
  const double theta = std::atan2(rho, n[2]);
  double phi = std::atan2(n[1], n[0]);
  if (phi < 0.0) phi += 2.0 * kPi;
  if (phi >= 2.0 * kPi) phi -= 2.0 * kPi;
  return {theta, phi};
}

/// Rotation of the sphere about the equatorial axis through longitudes
/// +-pi/2 (the y axis). A positive angle slides the north pole down the
/// prime meridian.
class Rotation {
 public:
  Rotation() = default;
  explicit Rotation(double angle) : angle_(angle), c_(std::cos(angle)), s_(std::sin(angle)) {}

  double angle() const noexcept { return angle_; }
  Rotation inverse() const { return Rotation(-angle_); }

  Vec3 apply(const Vec3& v) const noexcept {
    return {c_ * v[0] + s_ * v[2], v[1], -s_ * v[0] + c_ * v[2]};
  }
  Vec3 apply_inverse(const Vec3& v) const noexcept {
    return {c_ * v[0] - s_ * v[2], v[1], s_ * v[0] + c_ * v[2]};
  }

  /// Angles of the rotated point. theta in [0, pi], phi in [0, 2*pi).
  std::pair<double, double> rotate(double theta, double phi) const noexcept {
    if (angle_ == 0.0) return {theta, phi};
    return spherical_angles(apply(unit_vector(theta, phi)));
  }

  std::pair<double, double> unrotate(double theta, double phi) const noexcept {
    if (angle_ == 0.0) return {theta, phi};
    return spherical_angles(apply_inverse(unit_vector(theta, phi)));
  }

  /// Re-expresses a horizontal vector (components along e_theta, e_phi at the
  /// original point) in the local basis of the rotated chart.
  std::pair<double, double> rotate_tangent(double theta, double phi, double v_theta,
                                           double v_phi) const noexcept {
    if (angle_ == 0.0) return {v_theta, v_phi};
    return map_tangent(theta, phi, v_theta, v_phi, false);
  }

  std::pair<double, double> unrotate_tangent(double theta_r, double phi_r, double v_theta,
                                             double v_phi) const noexcept {
    if (angle_ == 0.0) return {v_theta, v_phi};
    return map_tangent(theta_r, phi_r, v_theta, v_phi, true);
  }

 private:
  static Vec3 e_theta(double theta, double phi) noexcept {
    return {std::cos(theta) * std::cos(phi), std::cos(theta) * std::sin(phi), -std::sin(theta)};
  }
  static Vec3 e_phi(double phi) noexcept { return {-std::sin(phi), std::cos(phi), 0.0}; }
  static double dot(const Vec3& a, const Vec3& b) noexcept {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
  }

  std::pair<double, double> map_tangent(double theta, double phi, double vt, double vp,
                                        bool inverse) const noexcept {
    const Vec3 et = e_theta(theta, phi);
    const Vec3 ep = e_phi(phi);
    const Vec3 v{vt * et[0] + vp * ep[0], vt * et[1] + vp * ep[1], vt * et[2] + vp * ep[2]};
    const Vec3 n = unit_vector(theta, phi);
    const Vec3 vr = inverse ? apply_inverse(v) : apply(v);
    const auto [tr, pr] = spherical_angles(inverse ? apply_inverse(n) : apply(n));
    return {dot(vr, e_theta(tr, pr)), dot(vr, e_phi(pr))};
  }

  double angle_ = 0.0;
  double c_ = 1.0;
  double s_ = 0.0;
};

/// n_ro rotations evenly spaced over [0, pi), the first being the identity.
inline std::vector<Rotation> rotation_schedule(std::size_t n_ro) {
  if (n_ro == 0) throw InvalidArgument("rotation_schedule: n_ro must be >= 1");
  std::vector<Rotation> out;
  out.reserve(n_ro);
  for (std::size_t k = 0; k < n_ro; ++k) {
    out.emplace_back(kPi * static_cast<double>(k) / static_cast<double>(n_ro));
  }
  return out;
}

/// Great-circle distance on the unit sphere.
inline double great_circle(double theta1, double phi1, double theta2, double phi2) noexcept {
  const Vec3 a = unit_vector(theta1, phi1);
  const Vec3 b = unit_vector(theta2, phi2);
  const Vec3 c{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
  return std::atan2(std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]),
                    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]);
}

}  // namespace mdrf
