#pragma once

// Rotated-chart sub-learners and their logistic polar-angle fusion.
//
//   u(x) = sum_r m_r u_r(x) / sum_r m_r,   m_r = logistic(10 (theta_r / pi - 0.5))
//
// theta_r is the polar angle of x in chart r. The pole-symmetric variant
// replaces theta_r / pi with 2 min(theta_r, pi - theta_r) / pi so both poles
// of a chart are down-weighted.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mdrf/errors.hpp"
#include "mdrf/geometry.hpp"
#include "mdrf/network.hpp"
#include "mdrf/oracle.hpp"
#include "mdrf/problem.hpp"
#include "mdrf/sampling.hpp"
#include "mdrf/training.hpp"

namespace mdrf {

enum class WeightVariant { PaperVerbatim, PoleSymmetric };

inline const char* to_string(WeightVariant v) {
  return v == WeightVariant::PaperVerbatim ? "paper-verbatim" : "pole-symmetric";
}

struct EnsembleSpec {
  std::size_t n_ro = 2;
  WeightVariant variant = WeightVariant::PaperVerbatim;
};

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double weight(double theta_r, WeightVariant variant) {
  const double s = variant == WeightVariant::PaperVerbatim ? theta_r / kPi
                                                           : 2.0 * std::min(theta_r, kPi - theta_r) / kPi;
  return logistic(10.0 * (s - 0.5));
}

struct ChartPrediction {
  std::vector<double> values;
  double theta_r = 0.0;
};

/// Weighted mean per field. A single prediction is returned unchanged.
inline std::vector<double> fuse(std::span<const ChartPrediction> preds, WeightVariant variant) {
  if (preds.empty()) throw InvalidArgument("fuse: at least one prediction is required");
  const std::size_t F = preds[0].values.size();
  for (const auto& p : preds)
    if (p.values.size() != F) throw InvalidArgument("fuse: predictions differ in field count");
  if (preds.size() == 1) return preds[0].values;
  double wsum = 0.0;
  std::vector<double> out(F, 0.0);
  for (const auto& p : preds) {
    const double m = weight(p.theta_r, variant);
    wsum += m;
    for (std::size_t j = 0; j < F; ++j) out[j] += m * p.values[j];
  }
  if (!(wsum > 0.0) || !std::isfinite(wsum)) throw NumericError("fuse: weights sum to zero");
  for (auto& v : out) v /= wsum;
  // the division can round a hair outside [min, max]; convexity is exact
  for (std::size_t j = 0; j < F; ++j) {
    double lo = preds[0].values[j], hi = lo;
    for (const auto& p : preds) {
      lo = std::min(lo, p.values[j]);
      hi = std::max(hi, p.values[j]);
    }
    out[j] = std::clamp(out[j], lo, hi);
  }
  return out;
}

// --- charts ---------------------------------------------------------------------

/// Maps 3D observations into a chart: coordinates are rotated and each
/// (v_theta, v_phi) pair at a point is re-expressed in the chart basis. A
/// lone velocity component cannot be rotated and is rejected.
inline std::vector<Observation3> observations_to_chart(const std::vector<Observation3>& obs, const Rotation& chart) {
  std::vector<Observation3> out;
  out.reserve(obs.size());
  std::map<Point3, std::array<int, 2>> vel;  // point -> row index of v_theta, v_phi
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto& o = obs[i];
    Observation3 c = o;
    const auto [th, ph] = chart.rotate(o.point[1], o.point[2]);
    c.point = {o.point[0], th, ph, o.point[3]};
    out.push_back(c);
    if (o.var == f3::v_theta || o.var == f3::v_phi) {
      auto& slot = vel.try_emplace(o.point, std::array<int, 2>{-1, -1}).first->second;
      slot[o.var == f3::v_theta ? 0 : 1] = static_cast<int>(i);
    }
  }
  if (chart.angle() == 0.0) return out;
  for (const auto& [p, rows] : vel) {
    if (rows[0] < 0 || rows[1] < 0)
      throw InvalidArgument("ensemble: velocity observations must come in (v_theta, v_phi) pairs for rotated charts");
    const auto [a, b] = chart.rotate_tangent(p[1], p[2], obs[static_cast<std::size_t>(rows[0])].value,
                                             obs[static_cast<std::size_t>(rows[1])].value);
    out[static_cast<std::size_t>(rows[0])].value = a;
    out[static_cast<std::size_t>(rows[1])].value = b;
  }
  return out;
}

/// Chart points of original-frame points, dropping those within 1e-3 of a
/// chart pole.
template <class Pts>
Pts points_to_chart(const Pts& src, const Problem3D& problem) {
  constexpr double guard = 1e-3;
  Pts out;
  for (std::size_t i = 0; i < src.points.size(); ++i) {
    const Point3 q = problem.to_chart(src.points[i]);
    if (q[1] < guard || q[1] > kPi - guard) continue;
    out.points.push_back(q);
    out.weights.push_back(src.weights[i]);
    if constexpr (requires { src.tags; }) out.tags.push_back(src.tags[i]);
  }
  // dropped points: rescale so each piece still sums to its measure
  auto rescale = [&](auto keep) {
    double before = 0.0, after = 0.0;
    for (std::size_t i = 0; i < src.points.size(); ++i)
      if (keep(src, i)) before += src.weights[i];
    for (std::size_t i = 0; i < out.points.size(); ++i)
      if (keep(out, i)) after += out.weights[i];
    if (after > 0.0)
      for (std::size_t i = 0; i < out.points.size(); ++i)
        if (keep(out, i)) out.weights[i] *= before / after;
  };
  if constexpr (requires { src.tags; }) {
    for (auto tag : {BoundaryTag::Surface, BoundaryTag::Bottom, BoundaryTag::Lateral, BoundaryTag::Initial})
      rescale([tag](const Pts& s, std::size_t i) { return s.tags[i] == tag; });
  } else {
    rescale([](const Pts&, std::size_t) { return true; });
  }
  return out;
}

// --- ensemble -------------------------------------------------------------------

struct SubLearner {
  Rotation chart;
  ModelParams params;
  Normalizer<4> normalizer;
  TrainTrace trace;
};

/// Fused predictor over every chart.
class EnsemblePredictor {
 public:
  EnsemblePredictor() = default;
  EnsemblePredictor(std::vector<SubLearner> members, WeightVariant variant)
      : members_(std::move(members)), variant_(variant) {
    if (members_.empty()) throw InvalidArgument("ensemble: no sub-learners");
  }

  const std::vector<SubLearner>& members() const noexcept { return members_; }
  WeightVariant variant() const noexcept { return variant_; }

  /// Per-member predictions at original-frame points, velocities already in
  /// the original basis (fields x n each).
  std::vector<Eigen::MatrixXd> member_predictions(std::span<const Point3> pts, std::size_t threads = 0) const {
    std::vector<Eigen::MatrixXd> out;
    for (const auto& m : members_) {
      std::vector<Point3> chart_pts(pts.size());
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto [th, ph] = m.chart.rotate(pts[i][1], pts[i][2]);
        chart_pts[i] = {pts[i][0], th, ph, pts[i][3]};
      }
      Eigen::MatrixXd v = predict<4>(m.params, m.normalizer, chart_pts, threads);
      if (m.chart.angle() != 0.0) {
        for (std::size_t i = 0; i < pts.size(); ++i) {
          const auto ix = static_cast<Eigen::Index>(i);
          const auto [a, b] = m.chart.unrotate_tangent(chart_pts[i][1], chart_pts[i][2], v(f3::v_theta, ix),
                                                       v(f3::v_phi, ix));
          v(f3::v_theta, ix) = a;
          v(f3::v_phi, ix) = b;
        }
      }
      out.push_back(std::move(v));
    }
    return out;
  }

  Eigen::MatrixXd predict_fused(std::span<const Point3> pts, std::size_t threads = 0) const {
    const auto each = member_predictions(pts, threads);
    if (members_.size() == 1) return each[0];
    const auto F = each[0].rows();
    Eigen::MatrixXd out(F, static_cast<Eigen::Index>(pts.size()));
    std::vector<ChartPrediction> preds(members_.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto ix = static_cast<Eigen::Index>(i);
      for (std::size_t r = 0; r < members_.size(); ++r) {
        preds[r].theta_r = members_[r].chart.rotate(pts[i][1], pts[i][2]).first;
        preds[r].values.resize(static_cast<std::size_t>(F));
        for (Eigen::Index j = 0; j < F; ++j) preds[r].values[static_cast<std::size_t>(j)] = each[r](j, ix);
      }
      const auto f = fuse(preds, variant_);
      for (Eigen::Index j = 0; j < F; ++j) out(j, ix) = f[static_cast<std::size_t>(j)];
    }
    return out;
  }

 private:
  std::vector<SubLearner> members_;
  WeightVariant variant_ = WeightVariant::PaperVerbatim;
};

struct EnsembleSetup {
  Domain3D domain{};
  physics::PdeConstants3D constants{};
  NetworkSpec network = NetworkSpec::default_3d();
  TrainConfig train{};
  std::size_t n_interior = 10000;
  std::size_t n_boundary_per_piece = 1000;
  std::uint64_t sampling_seed = 1;
  SamplingMode sampling_mode = SamplingMode::Gridded;
};

/// Sub-learner failure, naming the chart.
class SubLearnerFailed : public NumericError {
 public:
  SubLearnerFailed(std::size_t index, const std::string& what)
      : NumericError("sub-learner " + std::to_string(index) + ": " + what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Trains one sub-learner per rotation of rotation_schedule(n_ro).
inline EnsemblePredictor train_ensemble(const EnsembleSetup& setup, const std::vector<Observation3>& obs,
                                        const EnsembleSpec& spec, const TraceCallback& on_trace = {}) {
  const auto interior = sample_interior<4>(setup.domain, setup.n_interior, setup.sampling_seed, setup.sampling_mode);
  const auto boundary = sample_boundary(setup.domain, setup.n_boundary_per_piece, setup.sampling_seed + 1);
  const NetworkSpec net = with_unknowns(setup.network, setup.train.unknowns);
  std::vector<SubLearner> members;
  std::size_t index = 0;
  for (const auto& rot : rotation_schedule(spec.n_ro)) {
    try {
      Problem3D problem(setup.domain, setup.constants, net.pde_param_names, rot);
      const auto set = make_training_set(observations_to_chart(obs, rot), points_to_chart(interior, problem),
                                         points_to_chart(boundary, problem));
      auto result = train<4>(net, problem, set, setup.train, on_trace);
      members.push_back({rot, std::move(result.params), problem.normalizer(), std::move(result.trace)});
    } catch (const Error& e) {
      throw SubLearnerFailed(index, e.what());
    }
    ++index;
  }
  return EnsemblePredictor(std::move(members), spec.variant);
}

}  // namespace mdrf
