#pragma once

// Collocation points for the discrete loss. Every weight is
// measure(piece) / count, so summing the weights of a set reproduces the
// measure of the piece it samples (plain Monte Carlo quadrature).

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "mdrf/errors.hpp"
#include "mdrf/geometry.hpp"
#include "mdrf/physics/icbc.hpp"

namespace mdrf {

enum class SamplingMode { UniformRandom, Gridded };

template <std::size_t D>
struct WeightedPoints {
  std::vector<Point<D>> points;
  std::vector<double> weights;
  std::size_t size() const noexcept { return points.size(); }
  double total_weight() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
};

template <std::size_t D>
struct TaggedPoints {
  std::vector<Point<D>> points;
  std::vector<double> weights;
  std::vector<physics::BoundaryTag> tags;
  std::size_t size() const noexcept { return points.size(); }
};

/// Interior, boundary and data point sets entering the loss.
template <std::size_t D>
struct CollocationSet {
  WeightedPoints<D> interior;
  TaggedPoints<D> boundary;
  WeightedPoints<D> data;
};

namespace detail {
/// Strictly inside (0, 1).
inline double open_unit(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    const double v = u(rng);
    if (v > 0.0) return v;
  }
}

/// Largest m with m^D <= n.
inline std::size_t lattice_side(std::size_t n, std::size_t dim) {
  std::size_t m = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(n), 1.0 / static_cast<double>(dim)) + 1e-9));
  auto pw = [dim](std::size_t b) {
    std::size_t r = 1;
    for (std::size_t k = 0; k < dim; ++k) r *= b;
    return r;
  };
  while (m > 1 && pw(m) > n) --m;
  while (pw(m + 1) <= n) ++m;
  return std::max<std::size_t>(m, 1);
}

/// For the spherical domain: keeps residual points away from the poles.
template <std::size_t D>
bool near_pole(const Point<D>& p) {
  if constexpr (D == 4) {
    constexpr double guard = 1e-3;
    return p[1] < guard || p[1] > kPi - guard;
  } else {
    (void)p;
    return false;
  }
}
}  // namespace detail

/// Interior collocation points. Gridded mode places the largest m^D lattice
/// with m^D <= n at cell centres; uniform mode draws n points strictly inside.
template <std::size_t D>
WeightedPoints<D> sample_interior(const BoxDomain<D>& domain, std::size_t n, std::uint64_t seed,
                                  SamplingMode mode = SamplingMode::UniformRandom) {
  if (n == 0) throw InvalidArgument("sample_interior: n must be >= 1");
  WeightedPoints<D> out;
  if (mode == SamplingMode::Gridded) {
    const std::size_t m = detail::lattice_side(n, D);
    std::size_t total = 1;
    for (std::size_t k = 0; k < D; ++k) total *= m;
    out.points.reserve(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
      Point<D> p;
      std::size_t rem = idx;
      for (std::size_t k = D; k-- > 0;) {
        const std::size_t i = rem % m;
        rem /= m;
        const auto& ax = domain.axes[k];
        p[k] = ax.lower + ax.length() * (static_cast<double>(i) + 0.5) / static_cast<double>(m);
      }
      if (detail::near_pole<D>(p)) continue;
      out.points.push_back(p);
    }
  } else {
    std::mt19937_64 rng(seed);
    out.points.reserve(n);
    while (out.points.size() < n) {
      Point<D> p;
      for (std::size_t k = 0; k < D; ++k) {
        const auto& ax = domain.axes[k];
        p[k] = ax.lower + ax.length() * detail::open_unit(rng);
      }
      if (detail::near_pole<D>(p)) continue;
      out.points.push_back(p);
    }
  }
  out.weights.assign(out.points.size(), domain.measure() / static_cast<double>(out.points.size()));
  return out;
}

namespace detail {
template <std::size_t D>
void add_piece(TaggedPoints<D>& out, std::vector<Point<D>> pts, double measure, physics::BoundaryTag tag) {
  const double w = measure / static_cast<double>(pts.size());
  for (auto& p : pts) {
    out.points.push_back(p);
    out.weights.push_back(w);
    out.tags.push_back(tag);
  }
}

template <std::size_t D>
Point<D> uniform_point(const BoxDomain<D>& d, std::mt19937_64& rng) {
  Point<D> p;
  for (std::size_t k = 0; k < D; ++k) p[k] = d.axes[k].lower + d.axes[k].length() * open_unit(rng);
  return p;
}
}  // namespace detail

/// 2D pieces: surface z = z_max, bottom z = z_min, lateral x = x_min or
/// x_max (alternating), initial t = t_min.
inline TaggedPoints<3> sample_boundary(const Domain2D& d, std::size_t n_per_piece, std::uint64_t seed) {
  using physics::BoundaryTag;
  if (n_per_piece == 0) throw InvalidArgument("sample_boundary: n_per_piece must be >= 1");
  std::mt19937_64 rng(seed);
  TaggedPoints<3> out;
  auto piece = [&](auto&& pin) {
    std::vector<Point2> pts;
    for (std::size_t i = 0; i < n_per_piece; ++i) {
      Point2 p = detail::uniform_point(d, rng);
      pin(p, i);
      pts.push_back(p);
    }
    return pts;
  };
  const double lx = d.x().length(), lz = d.z().length(), lt = d.t().length();
  detail::add_piece(out, piece([&](Point2& p, std::size_t) { p[1] = d.z().upper; }), lx * lt, BoundaryTag::Surface);
  detail::add_piece(out, piece([&](Point2& p, std::size_t) { p[1] = d.z().lower; }), lx * lt, BoundaryTag::Bottom);
  detail::add_piece(out, piece([&](Point2& p, std::size_t i) { p[0] = (i % 2 == 0) ? d.x().lower : d.x().upper; }),
                    2.0 * lz * lt, BoundaryTag::Lateral);
  detail::add_piece(out, piece([&](Point2& p, std::size_t) { p[2] = d.t().lower; }), lx * lz, BoundaryTag::Initial);
  return out;
}

/// 3D pieces: surface r_a = max, bottom r_a = min, lateral theta faces (and
/// phi faces unless phi spans the full period), initial t = t_min.
inline TaggedPoints<4> sample_boundary(const Domain3D& d, std::size_t n_per_piece, std::uint64_t seed) {
  using physics::BoundaryTag;
  if (n_per_piece == 0) throw InvalidArgument("sample_boundary: n_per_piece must be >= 1");
  std::mt19937_64 rng(seed);
  TaggedPoints<4> out;
  auto piece = [&](auto&& pin) {
    std::vector<Point3> pts;
    for (std::size_t i = 0; i < n_per_piece; ++i) {
      Point3 p = detail::uniform_point(d, rng);
      pin(p, i);
      pts.push_back(p);
    }
    return pts;
  };
  const double lr = d.ra().length(), lth = d.theta().length(), lph = d.phi().length(), lt = d.t().length();
  const bool periodic_phi = lph >= 2.0 * kPi - 1e-6;
  detail::add_piece(out, piece([&](Point3& p, std::size_t) { p[0] = d.ra().upper; }), lth * lph * lt,
                    BoundaryTag::Surface);
  detail::add_piece(out, piece([&](Point3& p, std::size_t) { p[0] = d.ra().lower; }), lth * lph * lt,
                    BoundaryTag::Bottom);
  const std::size_t faces = periodic_phi ? 2 : 4;
  detail::add_piece(out,
                    piece([&](Point3& p, std::size_t i) {
                      switch (i % faces) {
                        case 0: p[1] = d.theta().lower; break;
                        case 1: p[1] = d.theta().upper; break;
                        case 2: p[2] = d.phi().lower; break;
                        default: p[2] = d.phi().upper; break;
                      }
                    }),
                    lr * lt * (2.0 * lph + (periodic_phi ? 0.0 : 2.0 * lth)), BoundaryTag::Lateral);
  detail::add_piece(out, piece([&](Point3& p, std::size_t) { p[3] = d.t().lower; }), lr * lth * lph,
                    BoundaryTag::Initial);
  return out;
}

}  // namespace mdrf
