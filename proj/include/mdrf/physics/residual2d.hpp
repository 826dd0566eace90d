#pragma once

// Dimensionless 2D primitive-equation system (one horizontal coordinate x,
// vertical coordinate z, time t):
//
//   v_t + v v_x + w v_z - eta v_xx - zeta v_zz + p_x        = 0
//   p_z + tau                                               = 0
//   v_x + w_z                                               = 0
//   tau_t + v tau_x + w tau_z - eta_tau tau_xx - zeta_tau tau_zz = Q
//
// with the Taylor-Green forcing
//   Q = pi cos(2 pi x) sin(4 pi z) exp(-4 pi^2 (eta + zeta + zeta_tau) t).
//
// Q is a known forcing: it is always built from the configured constants,
// while the operator uses whatever coefficient values the caller passes
// (the current estimates of the unknowns during training).

#include <array>
#include <cmath>
#include <cstdint>
#include <string>

#include "mdrf/autodiff/field_jets.hpp"
#include "mdrf/geometry.hpp"
#include "mdrf/network.hpp"
#include "mdrf/oracle.hpp"

namespace mdrf::physics {

namespace c2 {
enum : std::size_t { x = 0, z = 1, t = 2 };
}

struct PdeConstants2D {
  double eta = 0.01;
  double zeta = 0.01;
  double eta_tau = 0.01;
  double zeta_tau = 0.02;
  bool zeta_unknown = true;
  bool zeta_tau_unknown = true;

  TaylorGreenParams forcing() const { return {eta, zeta, zeta_tau}; }
};

/// Coefficients as seen by the operator; T is double or an AD scalar when
/// the unknowns are being optimized.
template <class T>
struct Coefficients2D {
  T eta, zeta, eta_tau, zeta_tau;
};

inline Coefficients2D<double> known_coefficients(const PdeConstants2D& c) {
  return {c.eta, c.zeta, c.eta_tau, c.zeta_tau};
}

/// Forcing of the temperature equation.
inline double source_q(const Point2& q, const PdeConstants2D& c) {
  return kPi * std::cos(2.0 * kPi * q[c2::x]) * std::sin(4.0 * kPi * q[c2::z]) *
         std::exp(-4.0 * kPi * kPi * (c.eta + c.zeta + c.zeta_tau) * q[c2::t]);
}

/// Derivatives each field must carry for residual_2d.
inline ad::DerivRequest residual_2d_request() {
  using ad::ChannelSet;
  const std::uint32_t X = 1u << c2::x, Z = 1u << c2::z, T = 1u << c2::t;
  ad::DerivRequest r(f2::count);
  r[f2::tau] = ChannelSet::with(X | Z | T, X | Z);
  r[f2::v] = ChannelSet::with(X | Z | T, X | Z);
  r[f2::w] = ChannelSet::with(Z, 0);
  r[f2::p] = ChannelSet::with(X | Z, 0);
  return r;
}

/// Residuals in the order (momentum, hydrostatic, continuity, temperature).
template <class T>
std::array<T, 4> residual_2d(const ad::FieldJets<T, 3>& u, const Coefficients2D<T>& c, double q) {
  using namespace c2;
  const T& v = u.val(f2::v);
  const T& w = u.val(f2::w);
  const T& tau = u.val(f2::tau);
  const T momentum = u.d(f2::v, t) + v * u.d(f2::v, x) + w * u.d(f2::v, z) - c.eta * u.dd(f2::v, x) -
                     c.zeta * u.dd(f2::v, z) + u.d(f2::p, x);
  const T hydrostatic = u.d(f2::p, z) + tau;
  const T continuity = u.d(f2::v, x) + u.d(f2::w, z);
  const T temperature = u.d(f2::tau, t) + v * u.d(f2::tau, x) + w * u.d(f2::tau, z) -
                        c.eta_tau * u.dd(f2::tau, x) - c.zeta_tau * u.dd(f2::tau, z) - q;
  return {momentum, hydrostatic, continuity, temperature};
}

/// Convenience form with every coefficient at its configured value.
inline std::array<double, 4> residual_2d(const ad::FieldJets<double, 3>& u, const PdeConstants2D& c,
                                         const Point2& q) {
  return residual_2d<double>(u, known_coefficients(c), source_q(q, c));
}

}  // namespace mdrf::physics
