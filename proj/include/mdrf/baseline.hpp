#pragma once

// Exact Gaussian-process regression, one independent GP per variable.
//
//   k(x, x') = s2 exp(-0.5 sum_d ((x_d - x'_d) / l_d)^2)
//   mean(x*) = k*^T (K + noise I)^-1 y
//   var(x*)  = s2 - k*^T (K + noise I)^-1 k*
//
// Zero prior mean; dense Cholesky, so the training set is capped.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "mdrf/errors.hpp"
#include "mdrf/geometry.hpp"
#include "mdrf/oracle.hpp"

namespace mdrf {

template <std::size_t D>
struct GprHyper {
  std::array<double, D> length_scale;
  double signal_variance = 1.0;
  double noise = 1e-6;
  std::size_t max_points = 2000;

  GprHyper() { length_scale.fill(0.2); }
  explicit GprHyper(double l, double noise_variance = 1e-6) : noise(noise_variance) { length_scale.fill(l); }
};

template <std::size_t D>
class GprVariable {
 public:
  GprVariable(std::vector<Point<D>> x, const std::vector<double>& y, const GprHyper<D>& h)
      : x_(std::move(x)), h_(h) {
    const auto n = static_cast<Eigen::Index>(x_.size());
    if (n == 0) throw NoData("gpr: no training points");
    if (x_.size() > h.max_points)
      throw InvalidArgument("gpr: " + std::to_string(x_.size()) + " training points exceed the cap of " +
                            std::to_string(h.max_points));
    for (double l : h.length_scale)
      if (!(l > 0.0)) throw InvalidArgument("gpr: length scales must be > 0");
    if (!(h.noise >= 0.0) || !(h.signal_variance > 0.0)) throw InvalidArgument("gpr: invalid variances");
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) K(i, j) = K(j, i) = kernel(x_[static_cast<std::size_t>(i)], x_[static_cast<std::size_t>(j)]);
      K(i, i) += h.noise;
    }
    llt_.compute(K);
    if (llt_.info() != Eigen::Success)
      throw NumericError("gpr: kernel matrix is not positive definite; increase the noise (jitter) variance");
    const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
    alpha_ = llt_.solve(yv);
    if (!alpha_.allFinite())
      throw NumericError("gpr: ill-conditioned kernel matrix; increase the noise (jitter) variance");
  }

  double kernel(const Point<D>& a, const Point<D>& b) const {
    double s = 0.0;
    for (std::size_t d = 0; d < D; ++d) {
      const double r = (a[d] - b[d]) / h_.length_scale[d];
      s += r * r;
    }
    return h_.signal_variance * std::exp(-0.5 * s);
  }

  /// Posterior mean and variance (clamped at 0 against round-off).
  std::pair<double, double> predict(const Point<D>& q) const {
    const auto n = static_cast<Eigen::Index>(x_.size());
    Eigen::VectorXd k(n);
    for (Eigen::Index i = 0; i < n; ++i) k(i) = kernel(q, x_[static_cast<std::size_t>(i)]);
    const double mean = k.dot(alpha_);
    const Eigen::VectorXd v = llt_.matrixL().solve(k);
    return {mean, std::max(0.0, h_.signal_variance - v.squaredNorm())};
  }

  std::size_t size() const noexcept { return x_.size(); }

 private:
  std::vector<Point<D>> x_;
  GprHyper<D> h_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
};

template <std::size_t D>
class GprModel {
 public:
  GprModel() = default;

  bool has(std::size_t var) const { return vars_.count(var) > 0; }
  const GprVariable<D>& at(std::size_t var) const {
    auto it = vars_.find(var);
    if (it == vars_.end()) throw NoData("gpr: no data for variable " + std::to_string(var));
    return it->second;
  }
  void add(std::size_t var, GprVariable<D> v) { vars_.insert_or_assign(var, std::move(v)); }

 private:
  std::map<std::size_t, GprVariable<D>> vars_;
};

/// Fits one GP per requested variable. A requested variable without any
/// observation is a NoData error.
template <std::size_t D>
GprModel<D> gpr_fit(const std::vector<Observation<D>>& obs, const std::vector<std::size_t>& variables,
                    const GprHyper<D>& h = {}, const std::vector<std::string>& names = {}) {
  GprModel<D> m;
  for (auto var : variables) {
    std::vector<Point<D>> x;
    std::vector<double> y;
    for (const auto& o : obs) {
      if (o.var == var) {
        x.push_back(o.point);
        y.push_back(o.value);
      }
    }
    if (x.empty()) {
      const std::string label = var < names.size() ? names[var] : std::to_string(var);
      throw NoData("gpr: variable '" + label + "' has no observations; a data-only model cannot predict it");
    }
    m.add(var, GprVariable<D>(std::move(x), y, h));
  }
  return m;
}

/// Posterior means and variances of one variable.
template <std::size_t D>
std::pair<std::vector<double>, std::vector<double>> gpr_predict(const GprModel<D>& model, std::size_t var,
                                                                std::span<const Point<D>> pts) {
  const auto& gp = model.at(var);
  std::vector<double> mean(pts.size()), variance(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) std::tie(mean[i], variance[i]) = gp.predict(pts[i]);
  return {mean, variance};
}

/// Chooses (length scale, noise) from the candidate lists by held-out RMSE
/// summed over the variables. The split is a seeded shuffle of the points.
template <std::size_t D>
GprHyper<D> gpr_grid_search(const std::vector<Observation<D>>& obs, const std::vector<std::size_t>& variables,
                            const std::vector<double>& length_scales, const std::vector<double>& noises,
                            double holdout_fraction = 0.2, std::uint64_t seed = 0) {
  if (length_scales.empty() || noises.empty()) throw InvalidArgument("gpr grid search: empty candidate list");
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0))
    throw InvalidArgument("gpr grid search: holdout_fraction must be in (0, 1)");
  std::vector<std::size_t> idx(obs.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto n_hold = static_cast<std::size_t>(holdout_fraction * static_cast<double>(obs.size()));
  std::vector<Observation<D>> train, hold;
  for (std::size_t i = 0; i < idx.size(); ++i) (i < n_hold ? hold : train).push_back(obs[idx[i]]);

  GprHyper<D> best;
  double best_score = std::numeric_limits<double>::infinity();
  for (double l : length_scales) {
    for (double nz : noises) {
      GprHyper<D> h(l, nz);
      double score = 0.0;
      try {
        const auto m = gpr_fit(train, variables, h);
        for (auto var : variables) {
          double se = 0.0;
          std::size_t n = 0;
          for (const auto& o : hold) {
            if (o.var != var) continue;
            const double e = m.at(var).predict(o.point).first - o.value;
            se += e * e;
            ++n;
          }
          if (n > 0) score += std::sqrt(se / static_cast<double>(n));
        }
      } catch (const NumericError&) {
        continue;
      }
      if (score < best_score) {
        best_score = score;
        best = h;
      }
    }
  }
  if (!std::isfinite(best_score)) throw NumericError("gpr grid search: every candidate failed to factorize");
  return best;
}

}  // namespace mdrf
