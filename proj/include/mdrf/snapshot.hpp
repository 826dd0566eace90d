#pragma once

// Parameter snapshots (JSON).
//
//   {
//     "format": "mdrf-snapshot", "version": 1, "mode": "2d" | "3d",
//     "domain": [[lo, hi], ...],            // x, z, t  or  r_a, theta, phi, t
//     "network": {"input_dim", "shared_width",
//                 "subnets": [{"name", "depth", "width"}], "pde_param_names"},
//     "weight_variant": "paper-verbatim" | "pole-symmetric",
//     "density": {"rho0", "tau0", "sigma0", "beta_tau", "beta_sigma"},  // 3d
//     "time_axis": {"origin", "unit_seconds"},                           // 3d
//     "members": [{"rotation_angle": a, "params": [...]}]
//   }
//
// "params" is the canonical flat vector (shared layer, subnets in field
// order, then the unknown coefficients); a 2D snapshot has one member with
// rotation angle 0. Reals are written in shortest round-trip form, so a
// snapshot reads back bit-exactly.

#include <Eigen/Dense>
#include <json.hpp>
#include <span>
#include <string>
#include <vector>

#include "mdrf/ensemble.hpp"
#include "mdrf/errors.hpp"
#include "mdrf/geometry.hpp"
#include "mdrf/io.hpp"
#include "mdrf/network.hpp"
#include "mdrf/problem.hpp"
#include "mdrf/training.hpp"

namespace mdrf {

struct DensityConstants {
  StateReference state{};
  double beta_tau = 2e-4, beta_sigma = 8e-4;
};

/// A trained model as stored on disk: one or several charts over a domain.
struct Snapshot {
  Mode mode = Mode::TwoD;
  std::vector<Interval> domain;
  NetworkSpec network;
  WeightVariant variant = WeightVariant::PaperVerbatim;
  DensityConstants density{};
  io::TimeAxis time_axis{};
  std::vector<double> rotation_angles;
  std::vector<ModelParams> members;

  Domain2D domain2() const { return Domain2D(domain.at(0), domain.at(1), domain.at(2)); }
  Domain3D domain3() const { return Domain3D(domain.at(0), domain.at(1), domain.at(2), domain.at(3)); }
  std::size_t field_count() const { return field_names(mode).size(); }

  /// Predictions at original-frame points (fields x n).
  Eigen::MatrixXd predict_2d(std::span<const Point2> pts, std::size_t threads = 0) const {
    if (mode != Mode::TwoD) throw InvalidArgument("snapshot: not a 2d model");
    return predict<3>(members.at(0), Normalizer<3>(domain2()), pts, threads);
  }

  EnsemblePredictor ensemble() const {
    if (mode != Mode::ThreeD) throw InvalidArgument("snapshot: not a 3d model");
    const Domain3D d = domain3();
    std::vector<SubLearner> subs;
    for (std::size_t r = 0; r < members.size(); ++r) {
      const Rotation rot(rotation_angles[r]);
      subs.push_back({rot, members[r], Normalizer<4>(rot.angle() == 0.0 ? d : full_sphere_box(d)), {}});
    }
    return EnsemblePredictor(std::move(subs), variant);
  }
};

inline Snapshot make_snapshot(const ModelParams& params, const Domain2D& domain) {
  Snapshot s;
  s.mode = Mode::TwoD;
  s.domain.assign(domain.axes.begin(), domain.axes.end());
  s.network = params.spec();
  s.rotation_angles = {0.0};
  s.members = {params};
  return s;
}

inline Snapshot make_snapshot(const EnsemblePredictor& model, const Domain3D& domain, const DensityConstants& density,
                              const io::TimeAxis& axis) {
  Snapshot s;
  s.time_axis = axis;
  s.mode = Mode::ThreeD;
  s.domain.assign(domain.axes.begin(), domain.axes.end());
  s.network = model.members().at(0).params.spec();
  s.variant = model.variant();
  s.density = density;
  for (const auto& m : model.members()) {
    s.rotation_angles.push_back(m.chart.angle());
    s.members.push_back(m.params);
  }
  return s;
}

inline std::string write_snapshot(const Snapshot& s) {
  using json = nlohmann::ordered_json;
  json j;
  j["format"] = "mdrf-snapshot";
  j["version"] = 1;
  j["mode"] = s.mode == Mode::TwoD ? "2d" : "3d";
  json dom = json::array();
  for (const auto& iv : s.domain) dom.push_back({iv.lower, iv.upper});
  j["domain"] = dom;
  json net;
  net["input_dim"] = s.network.input_dim;
  net["shared_width"] = s.network.shared_width;
  json subs = json::array();
  for (const auto& sub : s.network.subnets) subs.push_back({{"name", sub.name}, {"depth", sub.depth}, {"width", sub.width}});
  net["subnets"] = subs;
  net["pde_param_names"] = s.network.pde_param_names;
  j["network"] = net;
  j["weight_variant"] = to_string(s.variant);
  if (s.mode == Mode::ThreeD) {
    j["density"] = {{"rho0", s.density.state.rho0},
                    {"tau0", s.density.state.tau0},
                    {"sigma0", s.density.state.sigma0},
                    {"beta_tau", s.density.beta_tau},
                    {"beta_sigma", s.density.beta_sigma}};
    j["time_axis"] = {{"origin", s.time_axis.origin}, {"unit_seconds", s.time_axis.unit_seconds}};
  }
  json members = json::array();
  for (std::size_t r = 0; r < s.members.size(); ++r) {
    s.members[r].check_finite();
    members.push_back({{"rotation_angle", s.rotation_angles.at(r)}, {"params", s.members[r].values}});
  }
  j["members"] = members;
  return j.dump(1) + "\n";
}

/// SchemaError (with a JSON pointer) on any structural problem, including a
/// parameter vector whose length does not match the stored network.
inline Snapshot read_snapshot(const std::string& text) {
  using json = nlohmann::ordered_json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("/", std::string("snapshot is not valid JSON: ") + e.what());
  }
  auto need = [&](const json& obj, const char* key, const std::string& path) -> const json& {
    if (!obj.is_object() || !obj.contains(key)) throw SchemaError(path, std::string("missing key '") + key + "'");
    return obj[key];
  };
  try {
    if (need(j, "format", "/") != "mdrf-snapshot") throw SchemaError("/format", "not an mdrf snapshot");
    if (need(j, "version", "/") != 1) throw SchemaError("/version", "unsupported snapshot version");
    Snapshot s;
    const auto& mode = need(j, "mode", "/");
    if (mode != "2d" && mode != "3d") throw SchemaError("/mode", "must be \"2d\" or \"3d\"");
    s.mode = mode == "2d" ? Mode::TwoD : Mode::ThreeD;
    const std::size_t dims = s.mode == Mode::TwoD ? 3 : 4;
    const auto& dom = need(j, "domain", "/");
    if (!dom.is_array() || dom.size() != dims) throw SchemaError("/domain", "expected " + std::to_string(dims) + " ranges");
    for (const auto& r : dom) s.domain.emplace_back(r.at(0).get<double>(), r.at(1).get<double>());
    const auto& net = need(j, "network", "/");
    s.network = s.mode == Mode::TwoD ? NetworkSpec::default_2d() : NetworkSpec::default_3d();
    s.network.input_dim = need(net, "input_dim", "/network").get<std::size_t>();
    s.network.shared_width = need(net, "shared_width", "/network").get<std::size_t>();
    s.network.subnets.clear();
    for (const auto& sub : need(net, "subnets", "/network"))
      s.network.subnets.push_back(
          {sub.at("name").get<std::string>(), sub.at("depth").get<std::size_t>(), sub.at("width").get<std::size_t>()});
    s.network.pde_param_names = need(net, "pde_param_names", "/network").get<std::vector<std::string>>();
    s.network.pde_param_init.assign(s.network.pde_param_names.size(), 0.0);
    try {
      s.network.validate();
    } catch (const InvalidArgument& e) {
      throw SchemaError("/network", e.what());
    }
    const auto variant = j.value("weight_variant", std::string("paper-verbatim"));
    if (variant != "paper-verbatim" && variant != "pole-symmetric")
      throw SchemaError("/weight_variant", "unknown weight variant '" + variant + "'");
    s.variant = variant == "pole-symmetric" ? WeightVariant::PoleSymmetric : WeightVariant::PaperVerbatim;
    if (j.contains("density")) {
      const auto& d = j["density"];
      s.density.state.rho0 = d.at("rho0").get<double>();
      s.density.state.tau0 = d.at("tau0").get<double>();
      s.density.state.sigma0 = d.at("sigma0").get<double>();
      s.density.beta_tau = d.at("beta_tau").get<double>();
      s.density.beta_sigma = d.at("beta_sigma").get<double>();
    }
    if (j.contains("time_axis")) {
      s.time_axis.origin = j["time_axis"].at("origin").get<std::string>();
      s.time_axis.unit_seconds = j["time_axis"].at("unit_seconds").get<double>();
    }
    const auto& members = need(j, "members", "/");
    if (!members.is_array() || members.empty()) throw SchemaError("/members", "at least one member is required");
    if (s.mode == Mode::TwoD && members.size() != 1) throw SchemaError("/members", "a 2d snapshot has exactly one member");
    const std::size_t expected = parameter_count(s.network);
    for (std::size_t r = 0; r < members.size(); ++r) {
      const std::string path = "/members/" + std::to_string(r);
      s.rotation_angles.push_back(need(members[r], "rotation_angle", path).get<double>());
      ModelParams p(s.network);
      const auto values = need(members[r], "params", path).get<std::vector<double>>();
      if (values.size() != expected)
        throw SchemaError(path + "/params", "has " + std::to_string(values.size()) + " values, the network needs " +
                                                std::to_string(expected));
      p.values = values;
      s.members.push_back(std::move(p));
    }
    return s;
  } catch (const json::exception& e) {
    throw SchemaError("/", std::string("malformed snapshot: ") + e.what());
  }
}

}  // namespace mdrf
