#pragma once

// A Problem binds the residual operators to a domain, a chart, the known
// constants and the mapping from trainable coefficients to equation symbols.
// Points handed to a Problem are in the chart's physical coordinates (the
// network's input before normalization). Residuals are built over ad::Var so
// the trainer can take their adjoints; with constant Vars they evaluate as
// plain doubles.

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mdrf/autodiff/field_jets.hpp"
#include "mdrf/autodiff/tape.hpp"
#include "mdrf/geometry.hpp"
#include "mdrf/network.hpp"
#include "mdrf/physics/icbc.hpp"
#include "mdrf/physics/residual2d.hpp"
#include "mdrf/physics/residual3d.hpp"

namespace mdrf {

using ad::Var;
using physics::BoundaryTag;

/// Soft constraint pinning the free additive function of time in a field:
/// for every slice s, mean_g u(x_{s,g}) should equal `target`. The loss term
/// is sum_s slice_weight * (mean_s - target)^2.
template <std::size_t D>
struct Gauge {
  std::size_t field = 0;
  std::vector<std::vector<Point<D>>> slices;
  double target = 0.0;
  double slice_weight = 0.0;
};

template <std::size_t D>
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::size_t field_count() const = 0;
  virtual const Normalizer<D>& normalizer() const = 0;

  virtual ad::DerivRequest pde_request() const = 0;
  virtual std::size_t pde_count() const = 0;
  virtual void pde_residuals(const ad::FieldJets<Var, D>& u, std::span<const Var> coeffs, const Point<D>& x,
                             std::span<Var> out) const = 0;

  virtual ad::DerivRequest icbc_request(BoundaryTag tag) const = 0;
  virtual physics::Residuals<Var> icbc_residuals(const ad::FieldJets<Var, D>& u, const Point<D>& x,
                                                 BoundaryTag tag) const = 0;

  virtual const Gauge<D>* gauge() const { return nullptr; }
};

/// Index of `name` in `names`, or -1.
inline int coefficient_slot(const std::vector<std::string>& names, const std::string& name) {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}

// --- 2D ---------------------------------------------------------------------

struct GaugeGrid {
  bool enabled = true;
  std::size_t nx = 16, nz = 16, nt = 11;
  double target = 0.0;
};

/// Midpoint grid per time slice; slices at evenly spaced times including
/// both ends of the time axis.
inline Gauge<3> pressure_gauge_2d(const Domain2D& d, const GaugeGrid& g) {
  Gauge<3> out;
  out.field = f2::p;
  out.target = g.target;
  out.slice_weight = d.t().length() / static_cast<double>(g.nt);
  for (std::size_t s = 0; s < g.nt; ++s) {
    const double t = g.nt == 1 ? d.t().mid()
                               : d.t().lower + d.t().length() * static_cast<double>(s) / static_cast<double>(g.nt - 1);
    std::vector<Point2> pts;
    pts.reserve(g.nx * g.nz);
    for (std::size_t i = 0; i < g.nx; ++i)
      for (std::size_t k = 0; k < g.nz; ++k)
        pts.push_back({d.x().lower + d.x().length() * (static_cast<double>(i) + 0.5) / static_cast<double>(g.nx),
                       d.z().lower + d.z().length() * (static_cast<double>(k) + 0.5) / static_cast<double>(g.nz), t});
    out.slices.push_back(std::move(pts));
  }
  return out;
}

class Problem2D final : public Problem<3> {
 public:
  /// `unknowns` names the trainable coefficients in ModelParams order; any of
  /// eta, zeta, eta_tau, zeta_tau not listed uses its configured value.
  Problem2D(Domain2D domain, physics::PdeConstants2D constants, physics::BoundaryData2D boundary,
            const std::vector<std::string>& unknowns, GaugeGrid gauge = {})
      : domain_(domain),
        normalizer_(domain),
        c_(constants),
        boundary_(std::move(boundary)),
        slots_{coefficient_slot(unknowns, "eta"), coefficient_slot(unknowns, "zeta"),
               coefficient_slot(unknowns, "eta_tau"), coefficient_slot(unknowns, "zeta_tau")} {
    for (const auto& n : unknowns) {
      if (n != "eta" && n != "zeta" && n != "eta_tau" && n != "zeta_tau")
        throw InvalidArgument("2d problem: '" + n + "' is not a coefficient of the 2d system");
    }
    if (gauge.enabled) gauge_ = pressure_gauge_2d(domain_, gauge);
    has_gauge_ = gauge.enabled;
  }

  std::size_t field_count() const override { return f2::count; }
  const Normalizer<3>& normalizer() const override { return normalizer_; }
  const Domain2D& domain() const noexcept { return domain_; }
  const physics::PdeConstants2D& constants() const noexcept { return c_; }
  const physics::BoundaryData2D& boundary() const noexcept { return boundary_; }

  ad::DerivRequest pde_request() const override { return physics::residual_2d_request(); }
  std::size_t pde_count() const override { return 4; }

  void pde_residuals(const ad::FieldJets<Var, 3>& u, std::span<const Var> coeffs, const Point2& x,
                     std::span<Var> out) const override {
    auto pick = [&](int slot, double known) { return slot >= 0 ? coeffs[static_cast<std::size_t>(slot)] : Var(known); };
    const physics::Coefficients2D<Var> k{pick(slots_[0], c_.eta), pick(slots_[1], c_.zeta),
                                         pick(slots_[2], c_.eta_tau), pick(slots_[3], c_.zeta_tau)};
    const auto r = physics::residual_2d<Var>(u, k, physics::source_q(x, c_));
    for (std::size_t i = 0; i < 4; ++i) out[i] = r[i];
  }

  ad::DerivRequest icbc_request(BoundaryTag tag) const override { return physics::icbc_2d_request(boundary_, tag); }
  physics::Residuals<Var> icbc_residuals(const ad::FieldJets<Var, 3>& u, const Point2& x,
                                         BoundaryTag tag) const override {
    return physics::icbc_residual_2d<Var>(u, boundary_, x, tag);
  }

  const Gauge<3>* gauge() const override { return has_gauge_ ? &gauge_ : nullptr; }

 private:
  Domain2D domain_;
  Normalizer<3> normalizer_;
  physics::PdeConstants2D c_;
  physics::BoundaryData2D boundary_;
  std::array<int, 4> slots_;
  Gauge<3> gauge_;
  bool has_gauge_ = false;
};

// --- 3D ---------------------------------------------------------------------

/// Box covering every chart position a rotated chart can produce.
inline Domain3D full_sphere_box(const Domain3D& d) {
  return Domain3D(d.ra(), Interval(0.0, kPi), Interval(0.0, 2.0 * kPi), d.t());
}

class Problem3D final : public Problem<4> {
 public:
  Problem3D(Domain3D domain, physics::PdeConstants3D constants, const std::vector<std::string>& unknowns,
            Rotation chart = Rotation())
      : domain_(domain),
        chart_(chart),
        normalizer_(chart.angle() == 0.0 ? domain : full_sphere_box(domain)),
        c_(std::move(constants)),
        slots_{coefficient_slot(unknowns, "beta_tau"), coefficient_slot(unknowns, "beta_sigma")} {
    domain_.validate();
    for (const auto& n : unknowns) {
      if (n != "beta_tau" && n != "beta_sigma")
        throw InvalidArgument("3d problem: '" + n + "' is not a coefficient of the 3d system");
    }
  }

  std::size_t field_count() const override { return f3::count; }
  const Normalizer<4>& normalizer() const override { return normalizer_; }
  const Domain3D& domain() const noexcept { return domain_; }
  const Rotation& chart() const noexcept { return chart_; }
  const physics::PdeConstants3D& constants() const noexcept { return c_; }

  /// Original-frame point to chart coordinates and back.
  Point3 to_chart(const Point3& q) const {
    const auto [th, ph] = chart_.rotate(q[1], q[2]);
    return {q[0], th, ph, q[3]};
  }
  Point3 from_chart(const Point3& q) const {
    const auto [th, ph] = chart_.unrotate(q[1], q[2]);
    return {q[0], th, ph, q[3]};
  }

  ad::DerivRequest pde_request() const override { return physics::residual_3d_request(); }
  std::size_t pde_count() const override { return 6; }

  void pde_residuals(const ad::FieldJets<Var, 4>& u, std::span<const Var> coeffs, const Point3& x,
                     std::span<Var> out) const override {
    auto pick = [&](int slot, double known) { return slot >= 0 ? coeffs[static_cast<std::size_t>(slot)] : Var(known); };
    const physics::Coefficients3D<Var> beta{pick(slots_[0], c_.beta_tau), pick(slots_[1], c_.beta_sigma)};
    const auto r = physics::residual_3d<Var>(u, c_, beta, x, chart_);
    for (std::size_t i = 0; i < 6; ++i) out[i] = r[i];
  }

  ad::DerivRequest icbc_request(BoundaryTag tag) const override { return physics::icbc_3d_request(tag, c_.lateral); }
  physics::Residuals<Var> icbc_residuals(const ad::FieldJets<Var, 4>& u, const Point3& x,
                                         BoundaryTag tag) const override {
    return physics::icbc_residual_3d<Var>(u, c_, domain_, from_chart(x), tag, chart_);
  }

 private:
  Domain3D domain_;
  Rotation chart_;
  Normalizer<4> normalizer_;
  physics::PdeConstants3D c_;
  std::array<int, 2> slots_;
};

}  // namespace mdrf
