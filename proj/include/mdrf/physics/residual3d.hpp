#pragma once

// Spherical primitive equations in coordinates (r_a, theta, phi, t).
//
// Thin-shell convention: metric factors use the constant radius R (the Earth
// radius in the chosen length unit) and d/dr == d/dr_a. With s = sin(theta),
// cot = cos(theta)/s and the horizontal velocity v = (v_theta, v_phi):
//
//   A(f)     = v_theta f_theta / R + v_phi f_phi / (R s) + w f_r
//   Lap(f)   = (f_thth + cot f_theta + f_phph / s^2) / R^2
//   (Lap v)_theta = Lap(v_theta) - v_theta/(R s)^2 - 2 cos(theta) v_phi,phi /(R s)^2
//   (Lap v)_phi   = Lap(v_phi)   - v_phi/(R s)^2   + 2 cos(theta) v_theta,phi/(R s)^2
//   div v    = (v_theta,theta + cot v_theta + v_phi,phi / s) / R
//
// Residuals, in order:
//   0 momentum theta: v_theta,t + A(v_theta) - v_phi^2 cot/R + p_theta/(rho0 R)
//                     - f v_phi - zeta (Lap v)_theta - eta v_theta,rr
//   1 momentum phi:   v_phi,t + A(v_phi) + v_theta v_phi cot/R + p_phi/(rho0 R s)
//                     + f v_theta - zeta (Lap v)_phi - eta v_phi,rr
//   2 hydrostatic:    p_r + rho g, rho from the linear equation of state
//   3 continuity:     div v + w_r
//   4 temperature:    tau_t + A(tau) - zeta_tau Lap(tau) - eta_tau tau_rr
//   5 salinity:       sigma_t + A(sigma) - zeta_sigma Lap(sigma) - eta_sigma sigma_rr
//
// f = 2 omega_e cos(theta_0) with theta_0 the polar angle in the unrotated
// frame, so the same formulas hold in a rotated chart. Each residual is
// multiplied by its entry of `residual_scale` (nondimensionalization).

#include <array>
#include <cmath>
#include <cstdint>

#include "mdrf/autodiff/field_jets.hpp"
#include "mdrf/geometry.hpp"
#include "mdrf/network.hpp"
#include "mdrf/physics/data_field.hpp"

namespace mdrf::physics {

namespace c3 {
enum : std::size_t { r = 0, theta = 1, phi = 2, t = 3 };
}

inline constexpr double kPoleGuard = 1e-6;

enum class LateralCondition { DirichletVelocityNeumannTracer, FullyDirichlet };

struct PdeConstants3D {
  StateReference state{};
  double omega_e = 7.2921e-5;
  double g = 9.81;
  double radius = kEarthRadius;
  double eta = 1e-2, zeta = 1e3;
  double eta_tau = 1e-5, zeta_tau = 1e2;
  double eta_sigma = 1e-5, zeta_sigma = 1e2;
  double beta_tau = 2e-4, beta_sigma = 8e-4;
  bool beta_tau_unknown = true;
  bool beta_sigma_unknown = true;
  double alpha = 1.0;
  std::array<double, 6> residual_scale{1, 1, 1, 1, 1, 1};

  // boundary and initial data, functions of (r_a, theta, phi, t) in the
  // unrotated frame
  DataField tau_a{0.0};
  DataField b_tau{0.0}, b_sigma{0.0};
  DataField delta_v_theta{0.0}, delta_v_phi{0.0};
  DataField i_v_theta{0.0}, i_v_phi{0.0}, i_tau{0.0}, i_sigma{0.0};
  DataField lateral_tau{0.0}, lateral_sigma{0.0};
  LateralCondition lateral = LateralCondition::DirichletVelocityNeumannTracer;
};

template <class T>
struct Coefficients3D {
  T beta_tau, beta_sigma;
};

inline ad::DerivRequest residual_3d_request() {
  using ad::ChannelSet;
  const std::uint32_t R = 1u << c3::r, TH = 1u << c3::theta, PH = 1u << c3::phi, T = 1u << c3::t;
  const auto tracer = ChannelSet::with(R | TH | PH | T, R | TH | PH);
  ad::DerivRequest q(f3::count);
  q[f3::tau] = tracer;
  q[f3::sal] = tracer;
  q[f3::v_theta] = tracer;
  q[f3::v_phi] = tracer;
  q[f3::w] = ChannelSet::with(R, 0);
  q[f3::p] = ChannelSet::with(R | TH | PH, 0);
  return q;
}

inline void check_off_pole(double theta) {
  if (theta < kPoleGuard || theta > kPi - kPoleGuard)
    throw OutOfDomain("residual_3d: theta=" + std::to_string(theta) + " is at a pole singularity");
}

template <class T>
std::array<T, 6> residual_3d(const ad::FieldJets<T, 4>& u, const PdeConstants3D& c, const Coefficients3D<T>& beta,
                             const Point3& chart_point, const Rotation& chart = Rotation()) {
  using namespace c3;
  const double th = chart_point[theta];
  check_off_pole(th);
  const double R = c.radius;
  const double s = std::sin(th);
  const double ct = std::cos(th);
  const double cot = ct / s;
  const double rs2 = 1.0 / (R * R * s * s);
  const double f_cor =
      2.0 * c.omega_e * chart.apply_inverse(unit_vector(th, chart_point[phi]))[2];

  const T& vt = u.val(f3::v_theta);
  const T& vp = u.val(f3::v_phi);
  const T& w = u.val(f3::w);

  auto advect = [&](std::size_t f) {
    return vt * u.d(f, theta) * (1.0 / R) + vp * u.d(f, phi) * (1.0 / (R * s)) + w * u.d(f, r);
  };
  auto lap = [&](std::size_t f) {
    return (u.dd(f, theta) + cot * u.d(f, theta) + u.dd(f, phi) * (1.0 / (s * s))) * (1.0 / (R * R));
  };

  const T lap_vt = lap(f3::v_theta) - vt * rs2 - 2.0 * ct * rs2 * u.d(f3::v_phi, phi);
  const T lap_vp = lap(f3::v_phi) - vp * rs2 + 2.0 * ct * rs2 * u.d(f3::v_theta, phi);

  const T mom_t = u.d(f3::v_theta, t) + advect(f3::v_theta) - vp * vp * (cot / R) +
                  u.d(f3::p, theta) * (1.0 / (c.state.rho0 * R)) - f_cor * vp - c.zeta * lap_vt -
                  c.eta * u.dd(f3::v_theta, r);
  const T mom_p = u.d(f3::v_phi, t) + advect(f3::v_phi) + vt * vp * (cot / R) +
                  u.d(f3::p, phi) * (1.0 / (c.state.rho0 * R * s)) + f_cor * vt - c.zeta * lap_vp -
                  c.eta * u.dd(f3::v_phi, r);
  const T rho = density_from_state<T>(u.val(f3::tau), u.val(f3::sal), beta.beta_tau, beta.beta_sigma, c.state);
  const T hydro = u.d(f3::p, r) + rho * c.g;
  const T cont = (u.d(f3::v_theta, theta) + cot * vt + u.d(f3::v_phi, phi) * (1.0 / s)) * (1.0 / R) + u.d(f3::w, r);
  const T temp = u.d(f3::tau, t) + advect(f3::tau) - c.zeta_tau * lap(f3::tau) - c.eta_tau * u.dd(f3::tau, r);
  const T sal = u.d(f3::sal, t) + advect(f3::sal) - c.zeta_sigma * lap(f3::sal) - c.eta_sigma * u.dd(f3::sal, r);

  const auto& k = c.residual_scale;
  return {mom_t * k[0], mom_p * k[1], hydro * k[2], cont * k[3], temp * k[4], sal * k[5]};
}

inline std::array<double, 6> residual_3d(const ad::FieldJets<double, 4>& u, const PdeConstants3D& c,
                                         const Point3& point) {
  return residual_3d<double>(u, c, {c.beta_tau, c.beta_sigma}, point);
}

}  // namespace mdrf::physics
