#pragma once

// Evaluation: per-variable RMSE over regions, RMSE-over-time curves on a
// space grid, and binned error profiles along each coordinate.
//
// Region RMSE uses n uniform points (default 1e5) drawn in the region and
// reports the Monte Carlo standard error of the RMSE by the delta method,
// se(RMSE) = sd(e^2) / (2 RMSE sqrt(n)).

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <json.hpp>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mdrf/errors.hpp"
#include "mdrf/format.hpp"
#include "mdrf/geometry.hpp"
#include "mdrf/network.hpp"
#include "mdrf/oracle.hpp"

namespace mdrf {

/// A model's view for evaluation: values of every field at points
/// (fields x n). Rows of fields the model cannot predict are ignored.
template <std::size_t D>
struct Predictor {
  std::string name;
  std::vector<bool> provides;
  std::function<Eigen::MatrixXd(std::span<const Point<D>>)> predict;
};

/// Ground truth over points (fields x n).
template <std::size_t D>
using TruthFn = std::function<Eigen::MatrixXd(std::span<const Point<D>>)>;

inline TruthFn<3> taylor_green_truth(const TaylorGreenParams& p) {
  return [p](std::span<const Point2> pts) {
    Eigen::MatrixXd out(4, static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto u = exact(pts[i], p);
      for (int j = 0; j < 4; ++j) out(j, static_cast<Eigen::Index>(i)) = u[static_cast<std::size_t>(j)];
    }
    return out;
  };
}

template <std::size_t D>
struct Region {
  std::string name;
  std::string description;
  BoxDomain<D> box;                                // sampling box
  std::function<bool(const Point<D>&)> contains;   // empty: the whole box
};

/// The four evaluation regions of the 2D study. `data` is the observation
/// subdomain (mask over the training box), `extended-space` its complement
/// inside the training box, `extended-time` the same space box for times
/// past the training horizon, up to t1 + extra_time.
inline std::vector<Region<3>> standard_regions_2d(const Domain2D& d, const std::vector<RoundedRect>& mask,
                                                  double extra_time = 0.5) {
  auto in_mask = [mask](const Point2& q) {
    if (mask.empty()) return true;
    for (const auto& m : mask)
      if (m.contains(q[0], q[1])) return true;
    return false;
  };
  std::vector<Region<3>> r;
  r.push_back({"whole", "training space-time box", d, {}});
  r.push_back({"data", "observation subdomain (mask) inside the training box", d, in_mask});
  if (!mask.empty()) {
    r.push_back({"extended-space", "training box minus the observation subdomain", d,
                 [in_mask](const Point2& q) { return !in_mask(q); }});
  }
  if (extra_time > 0.0) {
    Domain2D later(d.x(), d.z(), Interval(d.t().upper, d.t().upper + extra_time));
    r.push_back({"extended-time", "training space box, times after the training horizon", later, {}});
  }
  return r;
}

/// n uniform points of the region (rejection sampling inside its box).
template <std::size_t D>
std::vector<Point<D>> sample_region(const Region<D>& region, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point<D>> pts;
  pts.reserve(n);
  std::size_t tries = 0;
  while (pts.size() < n) {
    if (++tries > 1000 * n + 1000) throw InvalidArgument("region '" + region.name + "' is empty");
    Point<D> q;
    for (std::size_t k = 0; k < D; ++k) q[k] = region.box.axes[k].lower + region.box.axes[k].length() * u(rng);
    if (!region.contains || region.contains(q)) pts.push_back(q);
  }
  return pts;
}

struct RmseEntry {
  std::optional<double> rmse;  // empty: absent (model cannot predict it)
  double mc_se = 0.0;
  std::size_t n = 0;
};

struct BinnedProfile {
  std::string axis;
  std::vector<double> edges;                          // bins + 1
  std::vector<std::vector<std::optional<double>>> rmse;  // [var][bin]
  std::vector<std::size_t> counts;
};

struct EvaluationReport {
  std::vector<std::string> variables;
  std::vector<RmseEntry> per_variable;
  std::vector<BinnedProfile> profiles;
};

inline RmseEntry rmse_of(std::span<const double> err2) {
  RmseEntry e;
  e.n = err2.size();
  if (err2.empty()) return e;
  double m = 0.0;
  for (double v : err2) m += v;
  m /= static_cast<double>(err2.size());
  double var = 0.0;
  for (double v : err2) var += (v - m) * (v - m);
  var /= std::max<double>(1.0, static_cast<double>(err2.size()) - 1.0);
  e.rmse = std::sqrt(m);
  e.mc_se = *e.rmse > 0.0 ? std::sqrt(var) / (2.0 * *e.rmse * std::sqrt(static_cast<double>(err2.size()))) : 0.0;
  return e;
}

/// Per-variable RMSE of `predicted` against `truth` (both fields x n) over
/// the points accepted by `region` (empty: all). Optional binned profiles
/// along `profile_axes` (coordinate indices) with `bins` bins over `box`.
template <std::size_t D>
EvaluationReport evaluate(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& truth,
                          std::span<const Point<D>> pts, const std::vector<std::string>& variables,
                          const std::vector<bool>& provides, const std::function<bool(const Point<D>&)>& region = {},
                          const std::vector<std::size_t>& profile_axes = {}, std::size_t bins = 10,
                          const std::vector<std::string>& axis_names = {},
                          std::optional<BoxDomain<D>> box = std::nullopt) {
  if (predicted.cols() != truth.cols() || static_cast<std::size_t>(truth.cols()) != pts.size())
    throw InvalidArgument("evaluate: prediction, truth and point counts differ");
  std::vector<std::size_t> sel;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (!region || region(pts[i])) sel.push_back(i);
  if (sel.empty()) throw InvalidArgument("evaluate: the region contains no evaluation points");
  const std::size_t F = variables.size();
  EvaluationReport rep;
  rep.variables = variables;
  std::vector<double> e2(sel.size());
  for (std::size_t j = 0; j < F; ++j) {
    if (j < provides.size() && !provides[j]) {
      rep.per_variable.push_back({std::nullopt, 0.0, sel.size()});
      continue;
    }
    for (std::size_t s = 0; s < sel.size(); ++s) {
      const auto i = static_cast<Eigen::Index>(sel[s]);
      const double e = predicted(static_cast<Eigen::Index>(j), i) - truth(static_cast<Eigen::Index>(j), i);
      e2[s] = e * e;
    }
    rep.per_variable.push_back(rmse_of(e2));
  }
  for (auto axis : profile_axes) {
    if (axis >= D) throw InvalidArgument("evaluate: profile axis out of range");
    BinnedProfile p;
    p.axis = axis < axis_names.size() ? axis_names[axis] : std::to_string(axis);
    double lo, hi;
    if (box) {
      lo = box->axes[axis].lower;
      hi = box->axes[axis].upper;
    } else {
      lo = hi = pts[sel[0]][axis];
      for (auto i : sel) {
        lo = std::min(lo, pts[i][axis]);
        hi = std::max(hi, pts[i][axis]);
      }
      if (hi == lo) hi = lo + 1.0;
    }
    for (std::size_t b = 0; b <= bins; ++b) p.edges.push_back(lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins));
    std::vector<std::vector<std::size_t>> members(bins);
    for (auto i : sel) {
      auto b = static_cast<std::size_t>(std::floor((pts[i][axis] - lo) / (hi - lo) * static_cast<double>(bins)));
      members[std::min(b, bins - 1)].push_back(i);
    }
    for (const auto& m : members) p.counts.push_back(m.size());
    p.rmse.assign(F, std::vector<std::optional<double>>(bins));
    for (std::size_t j = 0; j < F; ++j) {
      if (j < provides.size() && !provides[j]) continue;
      for (std::size_t b = 0; b < bins; ++b) {
        if (members[b].empty()) continue;
        double s = 0.0;
        for (auto i : members[b]) {
          const double e = predicted(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) -
                           truth(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
          s += e * e;
        }
        p.rmse[j][b] = std::sqrt(s / static_cast<double>(members[b].size()));
      }
    }
    rep.profiles.push_back(std::move(p));
  }
  return rep;
}

/// Per-variable RMSE against a labeled set: each observation row scores the
/// prediction of its variable at its point. Variables the model cannot
/// predict are absent; variables without rows have n = 0 and no RMSE.
template <std::size_t D>
EvaluationReport evaluate_labeled(const Eigen::MatrixXd& predicted, const std::vector<Observation<D>>& labeled,
                                  const std::vector<std::string>& variables, const std::vector<bool>& provides) {
  if (static_cast<std::size_t>(predicted.cols()) != labeled.size())
    throw InvalidArgument("evaluate: one prediction column per labeled row is required");
  if (labeled.empty()) throw InvalidArgument("evaluate: the labeled set is empty");
  EvaluationReport rep;
  rep.variables = variables;
  for (std::size_t j = 0; j < variables.size(); ++j) {
    std::vector<double> e2;
    for (std::size_t i = 0; i < labeled.size(); ++i) {
      if (labeled[i].var != j) continue;
      const double e = predicted(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) - labeled[i].value;
      e2.push_back(e * e);
    }
    if (j < provides.size() && !provides[j]) {
      rep.per_variable.push_back({std::nullopt, 0.0, e2.size()});
    } else {
      rep.per_variable.push_back(rmse_of(e2));
    }
  }
  return rep;
}

// --- comparison ---------------------------------------------------------------

struct TimeCurve {
  std::vector<double> times;
  std::vector<std::vector<std::optional<double>>> rmse;  // [var][time]
};

struct ModelReport {
  std::string name;
  std::vector<std::pair<std::string, EvaluationReport>> regions;
  TimeCurve curve;
};

struct ComparisonReport {
  std::vector<std::string> variables;
  std::vector<std::pair<std::string, std::string>> region_docs;  // name, description
  std::size_t region_points = 0;
  std::uint64_t seed = 0;
  std::size_t grid_nx = 0, grid_nz = 0;
  std::vector<ModelReport> models;

  /// RMSE of `model` / `region` / variable index, empty if absent.
  std::optional<double> rmse(const std::string& model, const std::string& region, std::size_t var) const {
    for (const auto& m : models) {
      if (m.name != model) continue;
      for (const auto& [r, rep] : m.regions)
        if (r == region) return rep.per_variable.at(var).rmse;
    }
    throw InvalidArgument("comparison: no entry for model '" + model + "' region '" + region + "'");
  }
};

struct CompareOptions {
  std::size_t region_points = 100000;
  std::uint64_t seed = 7;
  std::size_t grid_nx = 64, grid_nz = 64, grid_nt = 11;
  std::size_t bins = 10;
};

/// 2D comparison harness: region RMSE with profiles over x, z (depth) and t,
/// plus RMSE-over-time on an nx x nz cell-centre grid at nt times spanning
/// the training horizon.
inline ComparisonReport compare(const std::vector<Predictor<3>>& models, const TruthFn<3>& truth,
                                const std::vector<Region<3>>& regions, const Domain2D& domain,
                                const CompareOptions& opt = {}) {
  ComparisonReport rep;
  rep.variables = field_names(Mode::TwoD);
  rep.region_points = opt.region_points;
  rep.seed = opt.seed;
  rep.grid_nx = opt.grid_nx;
  rep.grid_nz = opt.grid_nz;
  for (const auto& r : regions) rep.region_docs.emplace_back(r.name, r.description);
  const std::vector<std::string> axes{"x", "z", "t"};

  std::vector<std::vector<Point2>> region_pts;
  std::vector<Eigen::MatrixXd> region_truth;
  for (std::size_t k = 0; k < regions.size(); ++k) {
    region_pts.push_back(sample_region(regions[k], opt.region_points, opt.seed + k));
    region_truth.push_back(truth(region_pts.back()));
  }
  std::vector<Point2> grid;
  std::vector<double> times;
  for (std::size_t s = 0; s < opt.grid_nt; ++s) {
    const double t = opt.grid_nt == 1 ? domain.t().lower
                                      : domain.t().lower + domain.t().length() * static_cast<double>(s) /
                                                               static_cast<double>(opt.grid_nt - 1);
    times.push_back(t);
    for (std::size_t i = 0; i < opt.grid_nx; ++i)
      for (std::size_t k = 0; k < opt.grid_nz; ++k)
        grid.push_back({domain.x().lower + domain.x().length() * (static_cast<double>(i) + 0.5) / static_cast<double>(opt.grid_nx),
                        domain.z().lower + domain.z().length() * (static_cast<double>(k) + 0.5) / static_cast<double>(opt.grid_nz),
                        t});
  }
  const Eigen::MatrixXd grid_truth = truth(grid);
  const std::size_t per_slice = opt.grid_nx * opt.grid_nz;

  for (const auto& m : models) {
    ModelReport mr;
    mr.name = m.name;
    for (std::size_t k = 0; k < regions.size(); ++k) {
      const Eigen::MatrixXd pred = m.predict(region_pts[k]);
      mr.regions.emplace_back(regions[k].name,
                              evaluate<3>(pred, region_truth[k], region_pts[k], rep.variables, m.provides, {},
                                          {0, 1, 2}, opt.bins, axes, regions[k].box));
    }
    const Eigen::MatrixXd gp = m.predict(grid);
    mr.curve.times = times;
    mr.curve.rmse.assign(rep.variables.size(), std::vector<std::optional<double>>(times.size()));
    for (std::size_t j = 0; j < rep.variables.size(); ++j) {
      if (j < m.provides.size() && !m.provides[j]) continue;
      for (std::size_t s = 0; s < times.size(); ++s) {
        double acc = 0.0;
        for (std::size_t i = s * per_slice; i < (s + 1) * per_slice; ++i) {
          const double e = gp(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) -
                           grid_truth(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
          acc += e * e;
        }
        mr.curve.rmse[j][s] = std::sqrt(acc / static_cast<double>(per_slice));
      }
    }
    rep.models.push_back(std::move(mr));
  }
  return rep;
}

// --- output ---------------------------------------------------------------------

inline nlohmann::ordered_json to_json(const EvaluationReport& r) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json vars = nlohmann::ordered_json::object();
  for (std::size_t k = 0; k < r.variables.size(); ++k) {
    const auto& e = r.per_variable[k];
    if (e.rmse) {
      vars[r.variables[k]] = {{"rmse", *e.rmse}, {"mc_se", e.mc_se}, {"n", e.n}};
    } else {
      vars[r.variables[k]] = {{"absent", true}, {"n", e.n}};
    }
  }
  j["variables"] = vars;
  nlohmann::ordered_json profiles = nlohmann::ordered_json::array();
  for (const auto& p : r.profiles) {
    nlohmann::ordered_json pj;
    pj["axis"] = p.axis;
    pj["edges"] = p.edges;
    pj["counts"] = p.counts;
    nlohmann::ordered_json per = nlohmann::ordered_json::object();
    for (std::size_t k = 0; k < r.variables.size(); ++k) {
      nlohmann::ordered_json a = nlohmann::ordered_json::array();
      for (const auto& v : p.rmse[k]) a.push_back(v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr));
      per[r.variables[k]] = a;
    }
    pj["rmse"] = per;
    profiles.push_back(pj);
  }
  j["profiles"] = profiles;
  return j;
}

inline nlohmann::ordered_json to_json(const ComparisonReport& r) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json header;
  header["variables"] = r.variables;
  nlohmann::ordered_json regions = nlohmann::ordered_json::array();
  for (const auto& [n, d] : r.region_docs) regions.push_back({{"name", n}, {"description", d}});
  header["regions"] = regions;
  header["region_points"] = r.region_points;
  header["seed"] = r.seed;
  header["time_grid"] = {{"nx", r.grid_nx}, {"nz", r.grid_nz}};
  j["header"] = header;
  nlohmann::ordered_json models = nlohmann::ordered_json::array();
  for (const auto& m : r.models) {
    nlohmann::ordered_json mj;
    mj["name"] = m.name;
    nlohmann::ordered_json reg = nlohmann::ordered_json::object();
    for (const auto& [name, rep] : m.regions) reg[name] = to_json(rep);
    mj["regions"] = reg;
    nlohmann::ordered_json curve;
    curve["t"] = m.curve.times;
    for (std::size_t k = 0; k < r.variables.size(); ++k) {
      nlohmann::ordered_json a = nlohmann::ordered_json::array();
      for (const auto& v : m.curve.rmse[k]) a.push_back(v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr));
      curve[r.variables[k]] = a;
    }
    mj["rmse_over_time"] = curve;
    models.push_back(mj);
  }
  j["models"] = models;
  return j;
}

inline std::string optional_cell(const std::optional<double>& v) { return v ? format_real(*v) : "absent"; }

/// Flat tables: region RMSE, RMSE over time, binned profiles.
inline std::string rmse_csv(const ComparisonReport& r) {
  std::string s = "model,region,var,rmse,mc_se,n\n";
  for (const auto& m : r.models)
    for (const auto& [region, rep] : m.regions)
      for (std::size_t k = 0; k < r.variables.size(); ++k) {
        const auto& e = rep.per_variable[k];
        s += m.name + "," + region + "," + r.variables[k] + "," + optional_cell(e.rmse) + "," +
             (e.rmse ? format_real(e.mc_se) : std::string("absent")) + "," + std::to_string(e.n) + "\n";
      }
  return s;
}

inline std::string time_curve_csv(const ComparisonReport& r) {
  std::string s = "model,var,t,rmse\n";
  for (const auto& m : r.models)
    for (std::size_t k = 0; k < r.variables.size(); ++k)
      for (std::size_t i = 0; i < m.curve.times.size(); ++i)
        s += m.name + "," + r.variables[k] + "," + format_real(m.curve.times[i]) + "," +
             optional_cell(m.curve.rmse[k][i]) + "\n";
  return s;
}

inline std::string profiles_csv(const ComparisonReport& r) {
  std::string s = "model,region,axis,bin_lo,bin_hi,var,rmse,n\n";
  for (const auto& m : r.models)
    for (const auto& [region, rep] : m.regions)
      for (const auto& p : rep.profiles)
        for (std::size_t k = 0; k < r.variables.size(); ++k)
          for (std::size_t b = 0; b + 1 < p.edges.size(); ++b)
            s += m.name + "," + region + "," + p.axis + "," + format_real(p.edges[b]) + "," +
                 format_real(p.edges[b + 1]) + "," + r.variables[k] + "," + optional_cell(p.rmse[k][b]) + "," +
                 std::to_string(p.counts[b]) + "\n";
  return s;
}

}  // namespace mdrf
