#pragma once

// Initial and boundary operators.
//
// 3D (unrotated frame; Gamma_u is r_a = top, Gamma_b is r_a = bottom,
// Gamma_l the theta/phi faces of a regional box, and the t = t0 slab):
//   surface:  v_r - delta_v, w, tau_r + alpha (tau - tau_a), sigma_r
//   bottom:   v, w, tau - b_tau, sigma - b_sigma
//   lateral:  v, w, d tau/d psi, d sigma/d psi      (Neumann tracers), or
//             v, w, tau - lateral_tau, sigma - lateral_sigma (fully Dirichlet)
//   initial:  v - i, tau - i_tau, sigma - i_sigma
//
// 2D: every piece carries Dirichlet conditions on a configurable field list
// against closed-form data (the Taylor-Green solution in the simulation
// study). The pressure gauge that pins the additive constant of p lives in
// the training loss because it is not a pointwise operator.

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mdrf/autodiff/field_jets.hpp"
#include "mdrf/geometry.hpp"
#include "mdrf/physics/data_field.hpp"
#include "mdrf/physics/residual2d.hpp"
#include "mdrf/physics/residual3d.hpp"

namespace mdrf::physics {

enum class BoundaryTag { Surface, Bottom, Lateral, Initial };

inline const char* to_string(BoundaryTag t) {
  switch (t) {
    case BoundaryTag::Surface: return "surface";
    case BoundaryTag::Bottom: return "bottom";
    case BoundaryTag::Lateral: return "lateral";
    case BoundaryTag::Initial: return "initial";
  }
  return "?";
}

/// Fixed-capacity residual list.
template <class T>
struct Residuals {
  std::array<T, 6> r{};
  std::size_t n = 0;
  void push(const T& v) { r[n++] = v; }
  const T& operator[](std::size_t i) const { return r[i]; }
  std::size_t size() const noexcept { return n; }
};

// --- 2D ---------------------------------------------------------------------

struct BoundaryData2D {
  std::array<DataField, 4> target;  // tau, v, w, p as functions of (x, z, t)
  std::array<std::vector<std::size_t>, 4> fields{};  // per tag: Dirichlet fields

  static BoundaryData2D taylor_green(const TaylorGreenParams& p,
                                     std::vector<std::size_t> dirichlet = {f2::tau, f2::v, f2::w}) {
    BoundaryData2D b;
    const std::vector<std::string> vars{"x", "z", "t"};
    auto num = [](double v) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      return std::string(buf);
    };
    const std::string e = "exp(-4*pi^2*" + num(p.eta + p.zeta) + "*t)";
    const std::string et = "exp(-4*pi^2*" + num(p.zeta_tau) + "*t)";
    b.target[f2::tau] = Expression::parse("sin(2*pi*z)*" + et, vars);
    b.target[f2::v] = Expression::parse("-sin(2*pi*x)*cos(2*pi*z)*" + e, vars);
    b.target[f2::w] = Expression::parse("cos(2*pi*x)*sin(2*pi*z)*" + e, vars);
    b.target[f2::p] = Expression::parse("0.25*cos(4*pi*x)*" + e + "^2 + cos(2*pi*z)*" + et + "/(2*pi)", vars);
    for (auto& f : b.fields) f = dirichlet;
    return b;
  }
};

/// Throws ContractViolation when `q` is not on the tagged piece.
inline void check_on_boundary(const Domain2D& d, const Point2& q, BoundaryTag tag, double tol = 1e-12) {
  auto on = [tol](double v, double target, double scale) { return std::fabs(v - target) <= tol * scale; };
  bool ok = false;
  switch (tag) {
    case BoundaryTag::Surface: ok = on(q[1], d.z().upper, d.z().length()); break;
    case BoundaryTag::Bottom: ok = on(q[1], d.z().lower, d.z().length()); break;
    case BoundaryTag::Lateral:
      ok = on(q[0], d.x().lower, d.x().length()) || on(q[0], d.x().upper, d.x().length());
      break;
    case BoundaryTag::Initial: ok = on(q[2], d.t().lower, d.t().length()); break;
  }
  if (!ok || !d.contains(q)) {
    throw ContractViolation(std::string("icbc_residual: point is not on the ") + to_string(tag) + " boundary");
  }
}

inline ad::DerivRequest icbc_2d_request(const BoundaryData2D& b, BoundaryTag tag) {
  ad::DerivRequest r(f2::count);
  for (auto f : b.fields[static_cast<std::size_t>(tag)]) r[f] = ad::ChannelSet::value_only();
  return r;
}

template <class T>
Residuals<T> icbc_residual_2d(const ad::FieldJets<T, 3>& u, const BoundaryData2D& b, const Point2& q,
                              BoundaryTag tag) {
  Residuals<T> out;
  for (auto f : b.fields[static_cast<std::size_t>(tag)]) out.push(u.val(f) - b.target[f](q));
  return out;
}

inline Residuals<double> icbc_residual(const ad::FieldJets<double, 3>& u, const Domain2D& d,
                                       const BoundaryData2D& b, const Point2& q, BoundaryTag tag) {
  check_on_boundary(d, q, tag);
  return icbc_residual_2d<double>(u, b, q, tag);
}

// --- 3D ---------------------------------------------------------------------

/// Lateral faces of a regional box: theta or phi at a bound. A face that
/// spans the whole period in phi is not a boundary.
inline bool on_lateral_3d(const Domain3D& d, const Point3& q, double tol, bool* theta_face) {
  auto on = [tol](double v, double target, double scale) { return std::fabs(v - target) <= tol * scale; };
  const bool periodic_phi = d.phi().length() >= 2.0 * kPi - 1e-6;
  if (on(q[1], d.theta().lower, d.theta().length()) || on(q[1], d.theta().upper, d.theta().length())) {
    if (theta_face) *theta_face = true;
    return true;
  }
  if (!periodic_phi && (on(q[2], d.phi().lower, d.phi().length()) || on(q[2], d.phi().upper, d.phi().length()))) {
    if (theta_face) *theta_face = false;
    return true;
  }
  return false;
}

inline void check_on_boundary(const Domain3D& d, const Point3& q, BoundaryTag tag, double tol = 1e-12) {
  auto on = [tol](double v, double target, double scale) { return std::fabs(v - target) <= tol * scale; };
  bool ok = false;
  switch (tag) {
    case BoundaryTag::Surface: ok = on(q[0], d.ra().upper, d.ra().length()); break;
    case BoundaryTag::Bottom: ok = on(q[0], d.ra().lower, d.ra().length()); break;
    case BoundaryTag::Lateral: ok = on_lateral_3d(d, q, tol, nullptr); break;
    case BoundaryTag::Initial: ok = on(q[3], d.t().lower, d.t().length()); break;
  }
  if (!ok || !d.contains(q)) {
    throw ContractViolation(std::string("icbc_residual: point is not on the ") + to_string(tag) + " boundary");
  }
}

inline ad::DerivRequest icbc_3d_request(BoundaryTag tag, LateralCondition lateral) {
  using ad::ChannelSet;
  const std::uint32_t R = 1u << c3::r, TH = 1u << c3::theta, PH = 1u << c3::phi;
  ad::DerivRequest q(f3::count);
  const auto val = ChannelSet::value_only();
  switch (tag) {
    case BoundaryTag::Surface:
      q[f3::v_theta] = q[f3::v_phi] = q[f3::sal] = ChannelSet::with(R, 0);
      q[f3::tau] = ChannelSet::with(R, 0);
      q[f3::w] = val;
      break;
    case BoundaryTag::Bottom:
      q[f3::v_theta] = q[f3::v_phi] = q[f3::w] = q[f3::tau] = q[f3::sal] = val;
      break;
    case BoundaryTag::Lateral:
      q[f3::v_theta] = q[f3::v_phi] = q[f3::w] = val;
      q[f3::tau] = q[f3::sal] =
          lateral == LateralCondition::FullyDirichlet ? val : ChannelSet::with(TH | PH, 0);
      break;
    case BoundaryTag::Initial:
      q[f3::v_theta] = q[f3::v_phi] = q[f3::tau] = q[f3::sal] = val;
      break;
  }
  return q;
}

/// `original` is the point in the unrotated frame (used for the tag and the
/// boundary data); the jets are derivatives in the chart given by `chart`.
template <class T>
Residuals<T> icbc_residual_3d(const ad::FieldJets<T, 4>& u, const PdeConstants3D& c, const Domain3D& d,
                              const Point3& original, BoundaryTag tag, const Rotation& chart = Rotation()) {
  using namespace c3;
  const auto [th_c, ph_c] = chart.rotate(original[theta], original[phi]);
  // horizontal data vectors are given in the unrotated basis
  auto to_chart = [&](double a, double b) { return chart.rotate_tangent(original[theta], original[phi], a, b); };
  Residuals<T> out;
  switch (tag) {
    case BoundaryTag::Surface: {
      const auto [dt, dp] = to_chart(c.delta_v_theta(original), c.delta_v_phi(original));
      out.push(u.d(f3::v_theta, r) - dt);
      out.push(u.d(f3::v_phi, r) - dp);
      out.push(u.val(f3::w) * 1.0);
      out.push(u.d(f3::tau, r) + c.alpha * (u.val(f3::tau) - c.tau_a(original)));
      out.push(u.d(f3::sal, r) * 1.0);
      break;
    }
    case BoundaryTag::Bottom:
      out.push(u.val(f3::v_theta) * 1.0);
      out.push(u.val(f3::v_phi) * 1.0);
      out.push(u.val(f3::w) * 1.0);
      out.push(u.val(f3::tau) - c.b_tau(original));
      out.push(u.val(f3::sal) - c.b_sigma(original));
      break;
    case BoundaryTag::Lateral: {
      out.push(u.val(f3::v_theta) * 1.0);
      out.push(u.val(f3::v_phi) * 1.0);
      out.push(u.val(f3::w) * 1.0);
      if (c.lateral == LateralCondition::FullyDirichlet) {
        out.push(u.val(f3::tau) - c.lateral_tau(original));
        out.push(u.val(f3::sal) - c.lateral_sigma(original));
      } else {
        check_off_pole(th_c);
        bool theta_face = true;
        on_lateral_3d(d, original, 1e-9, &theta_face);
        // unit normal of the face in the unrotated basis, then in the chart
        const auto [nt, np] = theta_face ? to_chart(1.0, 0.0) : to_chart(0.0, 1.0);
        const double kt = nt / c.radius;
        const double kp = np / (c.radius * std::sin(th_c));
        out.push(u.d(f3::tau, theta) * kt + u.d(f3::tau, phi) * kp);
        out.push(u.d(f3::sal, theta) * kt + u.d(f3::sal, phi) * kp);
      }
      break;
    }
    case BoundaryTag::Initial: {
      const auto [it, ip] = to_chart(c.i_v_theta(original), c.i_v_phi(original));
      out.push(u.val(f3::v_theta) - it);
      out.push(u.val(f3::v_phi) - ip);
      out.push(u.val(f3::tau) - c.i_tau(original));
      out.push(u.val(f3::sal) - c.i_sigma(original));
      break;
    }
  }
  (void)ph_c;
  return out;
}

inline Residuals<double> icbc_residual(const ad::FieldJets<double, 4>& u, const PdeConstants3D& c,
                                       const Domain3D& d, const Point3& q, BoundaryTag tag) {
  check_on_boundary(d, q, tag);
  return icbc_residual_3d<double>(u, c, d, q, tag);
}

}  // namespace mdrf::physics
