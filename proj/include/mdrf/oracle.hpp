#pragma once

// Closed-form decaying Taylor-Green vortex of the 2D system and the
// synthetic observation generator built on it.

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mdrf/autodiff/jet.hpp"
#include "mdrf/errors.hpp"
#include "mdrf/geometry.hpp"
#include "mdrf/network.hpp"

namespace mdrf {

struct TaylorGreenParams {
  double eta = 0.01;
  double zeta = 0.01;
  double zeta_tau = 0.02;
};

/// (tau, v, w, p) at (x, z, t). Templated so the tests can push jets through
/// it; with X = double it is the plain evaluation.
template <class X>
std::array<X, 4> taylor_green(const X& x, const X& z, const X& t, const TaylorGreenParams& p) {
  using ad::cos;
  using ad::exp;
  using ad::sin;
  using std::cos;
  using std::exp;
  using std::sin;
  const double k = 2.0 * kPi;
  const X decay = exp(t * (-4.0 * kPi * kPi * (p.eta + p.zeta)));
  const X decay_tau = exp(t * (-4.0 * kPi * kPi * p.zeta_tau));
  const X v = -(sin(x * k) * cos(z * k) * decay);
  const X w = cos(x * k) * sin(z * k) * decay;
  const X pr = cos(x * (2.0 * k)) * decay * decay * 0.25 + cos(z * k) * decay_tau * (1.0 / (2.0 * kPi));
  const X tau = sin(z * k) * decay_tau;
  return {tau, v, w, pr};
}

inline std::array<double, 4> exact(const Point2& q, const TaylorGreenParams& p) {
  return taylor_green<double>(q[0], q[1], q[2], p);
}

/// Rounded-rectangle mask in (x, z); the time axis is unrestricted.
struct RoundedRect {
  double cx = 0.5, cz = 0.5;
  double half_x = 0.5, half_z = 0.5;
  double radius = 0.0;

  bool contains(double x, double z) const noexcept {
    const double dx = std::fabs(x - cx) - (half_x - radius);
    const double dz = std::fabs(z - cz) - (half_z - radius);
    if (dx <= 0.0 || dz <= 0.0) return std::fabs(x - cx) <= half_x && std::fabs(z - cz) <= half_z;
    return dx * dx + dz * dz <= radius * radius;
  }
};

/// One measurement. `var` indexes field_names(mode).
template <std::size_t D>
struct Observation {
  Point<D> point{};
  std::size_t var = 0;
  double value = 0.0;
  double weight = 1.0;
};

using Observation2 = Observation<3>;
using Observation3 = Observation<4>;

struct ObservationSpec {
  std::size_t n = 1000;
  std::uint64_t seed = 42;
  std::vector<std::size_t> variables{f2::tau, f2::v, f2::w};  // pressure withheld by default
  double noise_sd = 0.0;
  Domain2D domain{};
  std::vector<RoundedRect> mask;  // empty: whole domain
};

/// n points uniform over the data subdomain (rejection-sampled against the
/// mask), one row per point and requested variable, ordered point-major.
inline std::vector<Observation2> generate_observations(const ObservationSpec& spec, const TaylorGreenParams& tg) {
  if (spec.n == 0) throw InvalidArgument("generate_observations: n must be >= 1");
  if (spec.variables.empty()) throw InvalidArgument("generate_observations: empty variable set");
  for (auto v : spec.variables)
    if (v >= f2::count) throw InvalidArgument("generate_observations: unknown variable index");
  if (spec.noise_sd < 0.0) throw InvalidArgument("generate_observations: noise_sd must be >= 0");
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<Observation2> out;
  out.reserve(spec.n * spec.variables.size());
  const auto& d = spec.domain;
  std::size_t accepted = 0, tries = 0;
  while (accepted < spec.n) {
    if (++tries > 1000 * spec.n) throw InvalidArgument("generate_observations: mask rejects almost every point");
    Point2 q{d.x().lower + d.x().length() * u(rng), d.z().lower + d.z().length() * u(rng),
             d.t().lower + d.t().length() * u(rng)};
    if (!spec.mask.empty()) {
      bool inside = false;
      for (const auto& m : spec.mask) inside = inside || m.contains(q[0], q[1]);
      if (!inside) continue;
    }
    const auto truth = exact(q, tg);
    for (auto var : spec.variables) {
      double value = truth[var];
      if (spec.noise_sd > 0.0) value += spec.noise_sd * noise(rng);
      out.push_back({q, var, value, 1.0});
    }
    ++accepted;
  }
  return out;
}

// --- 3D synthetic fixture ---------------------------------------------------------

/// Smooth synthetic ocean state on the sphere, used for smoke runs and the
/// 3D simulate command. Not a solution of the 3D system.
struct SyntheticOcean {
  double tau_surface = 10.0, tau_amplitude = 5.0, tau_depth_scale = 500.0;
  double sal_mean = 35.0, sal_amplitude = 0.5;
  double speed = 0.1;

  /// tau, sal, w, v_theta, v_phi, p at (r_a, theta, phi, t).
  std::array<double, 6> operator()(const Point3& q) const {
    const double ra = q[0], th = q[1], ph = q[2], t = q[3];
    const double st = std::sin(th), ct = std::cos(th);
    const double tau = tau_surface + tau_amplitude * st * std::exp(ra / tau_depth_scale) * (1.0 + 0.1 * std::cos(ph - t));
    const double sal = sal_mean + sal_amplitude * ct + 0.1 * sal_amplitude * std::sin(ph);
    const double vt = speed * std::sin(2.0 * th) * std::cos(ph) * std::cos(t);
    const double vp = speed * st * std::sin(ph + t);
    const double w = 1e-5 * st * std::cos(ph);
    const double p = -9.81 * 1025.0 * ra;
    return {tau, sal, w, vt, vp, p};
  }
};

struct ObservationSpec3D {
  std::size_t n = 1000;
  std::uint64_t seed = 42;
  std::vector<std::size_t> variables{f3::tau, f3::sal, f3::v_theta, f3::v_phi};
  double noise_sd = 0.0;
  Domain3D domain{};
};

/// n points uniform in the (r_a, theta, phi, t) box, one row per point and
/// variable. v_theta and v_phi must be requested together.
inline std::vector<Observation3> generate_observations_3d(const ObservationSpec3D& spec,
                                                          const SyntheticOcean& field = {}) {
  if (spec.n == 0) throw InvalidArgument("generate_observations: n must be >= 1");
  if (spec.variables.empty()) throw InvalidArgument("generate_observations: empty variable set");
  bool vt = false, vp = false;
  for (auto v : spec.variables) {
    if (v >= f3::count) throw InvalidArgument("generate_observations: unknown variable index");
    vt = vt || v == f3::v_theta;
    vp = vp || v == f3::v_phi;
  }
  if (vt != vp) throw InvalidArgument("generate_observations: v_theta and v_phi must be requested together");
  if (spec.noise_sd < 0.0) throw InvalidArgument("generate_observations: noise_sd must be >= 0");
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<Observation3> out;
  out.reserve(spec.n * spec.variables.size());
  const auto& d = spec.domain;
  for (std::size_t i = 0; i < spec.n; ++i) {
    Point3 q;
    for (std::size_t k = 0; k < 4; ++k) q[k] = d.axes[k].lower + d.axes[k].length() * u(rng);
    const auto truth = field(q);
    for (auto var : spec.variables) {
      double value = truth[var];
      if (spec.noise_sd > 0.0) value += spec.noise_sd * noise(rng);
      out.push_back({q, var, value, 1.0});
    }
  }
  return out;
}

}  // namespace mdrf
