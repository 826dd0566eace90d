#pragma once

// Boundary/initial data supplied either as a closed-form expression or as a
// gridded table with multilinear interpolation.

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mdrf/errors.hpp"
#include "mdrf/physics/expr.hpp"

namespace mdrf::physics {

/// Values on a tensor-product grid; axes must be strictly increasing.
/// Queries outside the grid are clamped to the boundary cell.
class GridTable {
 public:
  GridTable() = default;
  GridTable(std::vector<std::vector<double>> axes, std::vector<double> values)
      : axes_(std::move(axes)), values_(std::move(values)) {
    std::size_t n = 1;
    for (const auto& a : axes_) {
      if (a.size() < 2) throw InvalidArgument("grid table: every axis needs at least two nodes");
      for (std::size_t i = 1; i < a.size(); ++i)
        if (!(a[i] > a[i - 1])) throw InvalidArgument("grid table: axis nodes must increase strictly");
      n *= a.size();
    }
    if (axes_.empty() || n != values_.size())
      throw InvalidArgument("grid table: value count does not match the axes");
  }

  /// Row-major: the last axis varies fastest.
  double operator()(std::span<const double> point) const {
    const std::size_t d = axes_.size();
    if (point.size() < d) throw InvalidArgument("grid table: query has too few coordinates");
    std::vector<std::size_t> lo(d);
    std::vector<double> frac(d);
    for (std::size_t k = 0; k < d; ++k) {
      const auto& a = axes_[k];
      const double x = std::clamp(point[k], a.front(), a.back());
      std::size_t i = static_cast<std::size_t>(std::upper_bound(a.begin(), a.end(), x) - a.begin());
      i = std::clamp<std::size_t>(i, 1, a.size() - 1) - 1;
      lo[k] = i;
      frac[k] = (x - a[i]) / (a[i + 1] - a[i]);
    }
    double acc = 0.0;
    for (std::size_t corner = 0; corner < (std::size_t{1} << d); ++corner) {
      double w = 1.0;
      std::size_t flat = 0;
      for (std::size_t k = 0; k < d; ++k) {
        const bool up = corner >> k & 1u;
        w *= up ? frac[k] : 1.0 - frac[k];
        flat = flat * axes_[k].size() + lo[k] + (up ? 1 : 0);
      }
      if (w != 0.0) acc += w * values_[flat];
    }
    return acc;
  }

 private:
  std::vector<std::vector<double>> axes_;
  std::vector<double> values_;
};

class DataField {
 public:
  DataField() : impl_(Expression(0.0)) {}
  DataField(double constant) : impl_(Expression(constant)) {}  // NOLINT
  DataField(Expression e) : impl_(std::move(e)) {}             // NOLINT
  DataField(GridTable g) : impl_(std::move(g)) {}              // NOLINT

  double operator()(std::span<const double> point) const {
    return std::visit([&](const auto& f) { return f(point); }, impl_);
  }

 private:
  std::variant<Expression, GridTable> impl_;
};

}  // namespace mdrf::physics
