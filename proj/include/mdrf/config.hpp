#pragma once

// Run configuration: a JSON document checked against a published JSON
// Schema before any work. The schema is the single source of truth; the
// validator implements the subset of JSON Schema it uses (type, properties,
// additionalProperties: false, required, enum, minimum, exclusiveMinimum,
// maximum, items, minItems, maxItems).

#include <cstdint>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "mdrf/ensemble.hpp"
#include "mdrf/errors.hpp"
#include "mdrf/geometry.hpp"
#include "mdrf/io.hpp"
#include "mdrf/network.hpp"
#include "mdrf/oracle.hpp"
#include "mdrf/physics/icbc.hpp"
#include "mdrf/problem.hpp"
#include "mdrf/sampling.hpp"
#include "mdrf/training.hpp"

namespace mdrf {

using json = nlohmann::ordered_json;

namespace detail {

inline json range_schema(std::optional<double> lo = std::nullopt, std::optional<double> hi = std::nullopt) {
  json item = {{"type", "number"}};
  if (lo) item["minimum"] = *lo;
  if (hi) item["maximum"] = *hi;
  return {{"type", "array"}, {"items", item}, {"minItems", 2}, {"maxItems", 2}};
}

inline json object_schema(json properties, std::vector<std::string> required = {}) {
  json s = {{"type", "object"}, {"properties", std::move(properties)}, {"additionalProperties", false}};
  if (!required.empty()) s["required"] = required;
  return s;
}

inline json number(std::optional<double> min = std::nullopt, bool exclusive = false) {
  json s = {{"type", "number"}};
  if (min) s[exclusive ? "exclusiveMinimum" : "minimum"] = *min;
  return s;
}

inline json integer(std::int64_t min) { return {{"type", "integer"}, {"minimum", min}}; }

inline json unknown_schema() {
  return object_schema({{"initial", number()}, {"lower_bound", number()}});
}

inline json common_sections(Mode mode) {
  json depths = json::object();
  for (const auto& f : field_names(mode)) depths[f] = integer(2);
  return {
      {"network", object_schema({{"shared_width", integer(1)}, {"width", integer(1)}, {"depths", object_schema(depths)}})},
      {"sampling", object_schema({{"n_interior", integer(1)},
                                  {"n_boundary_per_piece", integer(1)},
                                  {"seed", integer(0)},
                                  {"mode", {{"type", "string"}, {"enum", {"uniform", "gridded"}}}}})},
      {"training", object_schema({{"step1_iters", integer(0)},
                                  {"step2_iters", integer(0)},
                                  {"learning_rate", number(0.0, true)},
                                  {"beta1", number(0.0)},
                                  {"beta2", number(0.0)},
                                  {"epsilon", number(0.0, true)},
                                  {"lambda1", number(0.0)},
                                  {"lambda2", number(0.0)},
                                  {"seed", integer(0)},
                                  {"trace_every", integer(1)},
                                  {"chunk_size", integer(1)},
                                  {"threads", integer(0)}})},
      {"paths", object_schema({{"data", {{"type", "string"}}}, {"out", {{"type", "string"}}}})},
  };
}

}  // namespace detail

/// The published schema of a run configuration for one mode.
inline json config_schema(Mode mode) {
  using namespace detail;
  json props = {{"mode", {{"type", "string"}, {"enum", {mode == Mode::TwoD ? "2d" : "3d"}}}}};
  const json common = common_sections(mode);
  for (const auto& [k, v] : common.items()) props[k] = v;
  if (mode == Mode::TwoD) {
    props["domain"] = object_schema({{"x", range_schema()}, {"z", range_schema()}, {"t", range_schema()}});
    json unknowns = json::object();
    for (const char* n : {"eta", "zeta", "eta_tau", "zeta_tau"}) unknowns[n] = unknown_schema();
    props["physics"] = object_schema({
        {"eta", number(0.0)},
        {"zeta", number(0.0)},
        {"eta_tau", number(0.0)},
        {"zeta_tau", number(0.0)},
        {"unknowns", object_schema(unknowns)},
        {"dirichlet_fields", {{"type", "array"}, {"items", {{"type", "string"}, {"enum", {"tau", "v", "w", "p"}}}}}},
        {"gauge", object_schema({{"enabled", {{"type", "boolean"}}},
                                 {"nx", integer(1)},
                                 {"nz", integer(1)},
                                 {"nt", integer(1)}})},
    });
    props["data"] = object_schema(
        {{"mask", {{"type", "array"},
                   {"items", object_schema({{"cx", number()},
                                            {"cz", number()},
                                            {"half_x", number(0.0, true)},
                                            {"half_z", number(0.0, true)},
                                            {"radius", number(0.0)}})}}}});
  } else {
    props["domain"] = object_schema({{"depth_m", range_schema(0.0)},
                                     {"lat_deg", range_schema(-90.0, 90.0)},
                                     {"lon_deg", range_schema(0.0, 360.0)},
                                     {"t", range_schema()}});
    props["time_axis"] = object_schema({{"origin", {{"type", "string"}}}, {"unit_seconds", number(0.0, true)}});
    json unknowns = json::object();
    for (const char* n : {"beta_tau", "beta_sigma"}) unknowns[n] = unknown_schema();
    json boundary = json::object();
    for (const char* n : {"tau_a", "b_tau", "b_sigma", "delta_v_theta", "delta_v_phi", "i_v_theta", "i_v_phi", "i_tau",
                          "i_sigma", "lateral_tau", "lateral_sigma"})
      boundary[n] = {{"type", json::array({"number", "string"})}};
    json phys = {{"omega_e", number()},
                 {"g", number(0.0, true)},
                 {"radius", number(0.0, true)},
                 {"alpha", number(0.0)},
                 {"rho0", number(0.0, true)},
                 {"tau0", number()},
                 {"sigma0", number()},
                 {"residual_scale",
                  {{"type", "array"}, {"items", number(0.0, true)}, {"minItems", 6}, {"maxItems", 6}}},
                 {"lateral", {{"type", "string"}, {"enum", {"neumann_tracer", "dirichlet"}}}},
                 {"unknowns", object_schema(unknowns)},
                 {"boundary", object_schema(boundary)}};
    for (const char* n : {"eta", "zeta", "eta_tau", "zeta_tau", "eta_sigma", "zeta_sigma", "beta_tau", "beta_sigma"})
      phys[n] = number(0.0);
    props["physics"] = object_schema(phys);
    props["ensemble"] = object_schema(
        {{"n_ro", integer(1)},
         {"weight_variant", {{"type", "string"}, {"enum", {"paper-verbatim", "pole-symmetric"}}}}});
  }
  json s = object_schema(props, {"mode"});
  s["$schema"] = "https://json-schema.org/draft/2020-12/schema";
  s["title"] = std::string("mdrf run configuration (") + (mode == Mode::TwoD ? "2d" : "3d") + ")";
  return s;
}

namespace detail {

inline std::string pointer_escape(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

inline bool has_type(const json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "boolean") return v.is_boolean();
  if (t == "integer") return v.is_number_integer() || (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>());
  if (t == "number") return v.is_number();
  return false;
}

inline void validate(const json& v, const json& s, const std::string& path) {
  const std::string where = path.empty() ? "/" : path;
  if (s.contains("type")) {
    bool ok = false;
    std::string names;
    if (s["type"].is_array()) {
      for (const auto& t : s["type"]) {
        ok = ok || has_type(v, t.get<std::string>());
        names += (names.empty() ? "" : " or ") + t.get<std::string>();
      }
    } else {
      names = s["type"].get<std::string>();
      ok = has_type(v, names);
    }
    if (!ok) throw SchemaError(where, "expected " + names);
  }
  if (s.contains("enum")) {
    bool ok = false;
    for (const auto& e : s["enum"]) ok = ok || e == v;
    if (!ok) throw SchemaError(where, "value " + v.dump() + " is not one of " + s["enum"].dump());
  }
  if (v.is_number()) {
    const double x = v.get<double>();
    if (s.contains("minimum") && x < s["minimum"].get<double>())
      throw SchemaError(where, "must be >= " + s["minimum"].dump());
    if (s.contains("exclusiveMinimum") && !(x > s["exclusiveMinimum"].get<double>()))
      throw SchemaError(where, "must be > " + s["exclusiveMinimum"].dump());
    if (s.contains("maximum") && x > s["maximum"].get<double>())
      throw SchemaError(where, "must be <= " + s["maximum"].dump());
  }
  if (v.is_object()) {
    if (s.contains("required"))
      for (const auto& r : s["required"])
        if (!v.contains(r.get<std::string>())) throw SchemaError(where, "missing required key '" + r.get<std::string>() + "'");
    const json props = s.value("properties", json::object());
    for (const auto& [k, sub] : v.items()) {
      const std::string child = path + "/" + pointer_escape(k);
      if (props.contains(k)) {
        validate(sub, props[k], child);
      } else if (s.contains("additionalProperties") && s["additionalProperties"] == false) {
        throw SchemaError(child, "unknown key");
      }
    }
  }
  if (v.is_array()) {
    if (s.contains("minItems") && v.size() < s["minItems"].get<std::size_t>())
      throw SchemaError(where, "needs at least " + s["minItems"].dump() + " items");
    if (s.contains("maxItems") && v.size() > s["maxItems"].get<std::size_t>())
      throw SchemaError(where, "allows at most " + s["maxItems"].dump() + " items");
    if (s.contains("items"))
      for (std::size_t i = 0; i < v.size(); ++i) validate(v[i], s["items"], path + "/" + std::to_string(i));
  }
}

}  // namespace detail

/// Throws SchemaError carrying the JSON pointer of the first violation.
inline void validate_config(const json& doc) {
  if (!doc.is_object()) throw SchemaError("/", "expected object");
  if (!doc.contains("mode")) throw SchemaError("/", "missing required key 'mode'");
  const auto& m = doc["mode"];
  if (!m.is_string() || (m != "2d" && m != "3d")) throw SchemaError("/mode", "value must be \"2d\" or \"3d\"");
  detail::validate(doc, config_schema(m == "2d" ? Mode::TwoD : Mode::ThreeD), "");
}

struct SamplingConfig {
  std::size_t n_interior = 10000;
  std::size_t n_boundary_per_piece = 1000;
  std::uint64_t seed = 1;
  SamplingMode mode = SamplingMode::UniformRandom;  // gridded is the 3d default
};

/// Parsed configuration. Members of the other mode keep their defaults.
struct RunConfig {
  Mode mode = Mode::TwoD;
  json source;  // the validated document, for hashing and manifests

  Domain2D domain2{};
  Domain3D domain3{};
  io::TimeAxis time_axis{};
  std::size_t shared_width = 128;
  std::size_t width = 128;
  std::vector<std::pair<std::string, std::size_t>> depths;

  physics::PdeConstants2D physics2{};
  std::vector<std::size_t> dirichlet_fields{f2::tau, f2::v, f2::w};
  GaugeGrid gauge{};
  std::vector<RoundedRect> mask;

  physics::PdeConstants3D physics3{};
  EnsembleSpec ensemble{};

  SamplingConfig sampling{};
  TrainConfig train{};
  std::optional<std::string> data_path, out_path;

  NetworkSpec network() const {
    NetworkSpec s = mode == Mode::TwoD ? NetworkSpec::default_2d(width) : NetworkSpec::default_3d(width);
    s.shared_width = shared_width;
    for (const auto& [name, depth] : depths) s.subnets[field_index(mode, name)].depth = depth;
    return with_unknowns(s, train.unknowns);
  }
};

namespace detail {

template <class T>
void read_if(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj[key].get<T>();
}

inline Interval interval_of(const json& a, const std::string& path) {
  const double lo = a[0].get<double>(), hi = a[1].get<double>();
  if (!(hi > lo)) throw SchemaError(path, "range must satisfy lower < upper");
  return Interval(lo, hi);
}

inline physics::DataField data_field_of(const json& v, const std::string& path) {
  if (v.is_number()) return physics::DataField(v.get<double>());
  try {
    return physics::DataField(physics::Expression::parse(v.get<std::string>(), {"r_a", "theta", "phi", "t"}));
  } catch (const Error& e) {
    throw SchemaError(path, e.what());
  }
}

inline std::vector<UnknownCoefficient> unknowns_of(const json& u, const std::vector<std::string>& order) {
  std::vector<UnknownCoefficient> out;
  for (const auto& name : order) {
    if (!u.contains(name)) continue;
    UnknownCoefficient c{name, 0.0, 0.0};
    read_if(u[name], "initial", c.initial);
    read_if(u[name], "lower_bound", c.lower_bound);
    out.push_back(c);
  }
  return out;
}

}  // namespace detail

/// Validates then converts; SchemaError on any problem.
inline RunConfig parse_config(const json& doc) {
  using detail::read_if;
  validate_config(doc);
  RunConfig c;
  c.source = doc;
  c.mode = doc["mode"] == "2d" ? Mode::TwoD : Mode::ThreeD;
  if (c.mode == Mode::ThreeD) c.sampling.mode = SamplingMode::Gridded;

  if (doc.contains("network")) {
    const auto& n = doc["network"];
    read_if(n, "width", c.width);
    c.shared_width = c.width;
    read_if(n, "shared_width", c.shared_width);
    if (n.contains("depths"))
      for (const auto& [k, v] : n["depths"].items()) c.depths.emplace_back(k, v.get<std::size_t>());
  }
  if (doc.contains("sampling")) {
    const auto& s = doc["sampling"];
    read_if(s, "n_interior", c.sampling.n_interior);
    read_if(s, "n_boundary_per_piece", c.sampling.n_boundary_per_piece);
    read_if(s, "seed", c.sampling.seed);
    if (s.contains("mode")) c.sampling.mode = s["mode"] == "uniform" ? SamplingMode::UniformRandom : SamplingMode::Gridded;
  }
  auto& t = c.train;
  if (c.mode == Mode::ThreeD) t.unknowns = {{"beta_tau", 0.0, 0.0}, {"beta_sigma", 0.0, 0.0}};
  if (doc.contains("training")) {
    const auto& s = doc["training"];
    read_if(s, "step1_iters", t.step1_iters);
    read_if(s, "step2_iters", t.step2_iters);
    read_if(s, "learning_rate", t.learning_rate);
    read_if(s, "beta1", t.adam.beta1);
    read_if(s, "beta2", t.adam.beta2);
    read_if(s, "epsilon", t.adam.epsilon);
    read_if(s, "lambda1", t.lambda1);
    read_if(s, "lambda2", t.lambda2);
    read_if(s, "seed", t.seed);
    read_if(s, "trace_every", t.trace_every);
    read_if(s, "chunk_size", t.chunk_size);
    read_if(s, "threads", t.threads);
  }
  if (doc.contains("paths")) {
    const auto& p = doc["paths"];
    if (p.contains("data")) c.data_path = p["data"].get<std::string>();
    if (p.contains("out")) c.out_path = p["out"].get<std::string>();
  }

  if (c.mode == Mode::TwoD) {
    if (doc.contains("domain")) {
      const auto& d = doc["domain"];
      Interval x = c.domain2.x(), z = c.domain2.z(), tt = c.domain2.t();
      if (d.contains("x")) x = detail::interval_of(d["x"], "/domain/x");
      if (d.contains("z")) z = detail::interval_of(d["z"], "/domain/z");
      if (d.contains("t")) tt = detail::interval_of(d["t"], "/domain/t");
      c.domain2 = Domain2D(x, z, tt);
    }
    if (doc.contains("physics")) {
      const auto& p = doc["physics"];
      read_if(p, "eta", c.physics2.eta);
      read_if(p, "zeta", c.physics2.zeta);
      read_if(p, "eta_tau", c.physics2.eta_tau);
      read_if(p, "zeta_tau", c.physics2.zeta_tau);
      if (p.contains("unknowns")) t.unknowns = detail::unknowns_of(p["unknowns"], {"eta", "zeta", "eta_tau", "zeta_tau"});
      if (p.contains("dirichlet_fields")) {
        c.dirichlet_fields.clear();
        for (const auto& f : p["dirichlet_fields"]) c.dirichlet_fields.push_back(field_index(Mode::TwoD, f.get<std::string>()));
      }
      if (p.contains("gauge")) {
        const auto& g = p["gauge"];
        read_if(g, "enabled", c.gauge.enabled);
        read_if(g, "nx", c.gauge.nx);
        read_if(g, "nz", c.gauge.nz);
        read_if(g, "nt", c.gauge.nt);
      }
    }
    c.physics2.zeta_unknown = c.physics2.zeta_tau_unknown = false;
    for (const auto& u : t.unknowns) {
      if (u.name == "zeta") c.physics2.zeta_unknown = true;
      if (u.name == "zeta_tau") c.physics2.zeta_tau_unknown = true;
    }
    if (doc.contains("data") && doc["data"].contains("mask")) {
      for (const auto& m : doc["data"]["mask"]) {
        RoundedRect r;
        read_if(m, "cx", r.cx);
        read_if(m, "cz", r.cz);
        read_if(m, "half_x", r.half_x);
        read_if(m, "half_z", r.half_z);
        read_if(m, "radius", r.radius);
        if (r.radius > std::min(r.half_x, r.half_z)) throw SchemaError("/data/mask", "radius exceeds a half extent");
        c.mask.push_back(r);
      }
    }
  } else {
    if (doc.contains("domain")) {
      const auto& d = doc["domain"];
      Interval ra = c.domain3.ra(), th = c.domain3.theta(), ph = c.domain3.phi(), tt = c.domain3.t();
      if (d.contains("depth_m")) {
        const auto depth = detail::interval_of(d["depth_m"], "/domain/depth_m");
        ra = Interval(-depth.upper, -depth.lower);
      }
      if (d.contains("lat_deg")) {
        const auto lat = detail::interval_of(d["lat_deg"], "/domain/lat_deg");
        th = Interval(io::lat_to_theta(lat.upper), io::lat_to_theta(lat.lower));
      }
      if (d.contains("lon_deg")) {
        const auto lon = detail::interval_of(d["lon_deg"], "/domain/lon_deg");
        ph = Interval(lon.lower * kPi / 180.0, lon.upper * kPi / 180.0);
      }
      if (d.contains("t")) tt = detail::interval_of(d["t"], "/domain/t");
      c.domain3 = Domain3D(ra, th, ph, tt);
    }
    if (doc.contains("time_axis")) {
      read_if(doc["time_axis"], "origin", c.time_axis.origin);
      read_if(doc["time_axis"], "unit_seconds", c.time_axis.unit_seconds);
      try {
        (void)io::parse_iso8601(c.time_axis.origin);
      } catch (const Error& e) {
        throw SchemaError("/time_axis/origin", e.what());
      }
    }
    if (doc.contains("physics")) {
      const auto& p = doc["physics"];
      auto& k = c.physics3;
      read_if(p, "omega_e", k.omega_e);
      read_if(p, "g", k.g);
      read_if(p, "radius", k.radius);
      read_if(p, "alpha", k.alpha);
      read_if(p, "rho0", k.state.rho0);
      read_if(p, "tau0", k.state.tau0);
      read_if(p, "sigma0", k.state.sigma0);
      read_if(p, "eta", k.eta);
      read_if(p, "zeta", k.zeta);
      read_if(p, "eta_tau", k.eta_tau);
      read_if(p, "zeta_tau", k.zeta_tau);
      read_if(p, "eta_sigma", k.eta_sigma);
      read_if(p, "zeta_sigma", k.zeta_sigma);
      read_if(p, "beta_tau", k.beta_tau);
      read_if(p, "beta_sigma", k.beta_sigma);
      if (p.contains("residual_scale"))
        for (std::size_t i = 0; i < 6; ++i) k.residual_scale[i] = p["residual_scale"][i].get<double>();
      if (p.contains("lateral"))
        k.lateral = p["lateral"] == "dirichlet" ? physics::LateralCondition::FullyDirichlet
                                                : physics::LateralCondition::DirichletVelocityNeumannTracer;
      if (p.contains("unknowns")) t.unknowns = detail::unknowns_of(p["unknowns"], {"beta_tau", "beta_sigma"});
      if (p.contains("boundary")) {
        const auto& b = p["boundary"];
        const std::pair<const char*, physics::DataField*> slots[] = {
            {"tau_a", &k.tau_a},         {"b_tau", &k.b_tau},
            {"b_sigma", &k.b_sigma},     {"delta_v_theta", &k.delta_v_theta},
            {"delta_v_phi", &k.delta_v_phi}, {"i_v_theta", &k.i_v_theta},
            {"i_v_phi", &k.i_v_phi},     {"i_tau", &k.i_tau},
            {"i_sigma", &k.i_sigma},     {"lateral_tau", &k.lateral_tau},
            {"lateral_sigma", &k.lateral_sigma}};
        for (const auto& [name, slot] : slots)
          if (b.contains(name)) *slot = detail::data_field_of(b[name], std::string("/physics/boundary/") + name);
      }
    }
    c.physics3.beta_tau_unknown = c.physics3.beta_sigma_unknown = false;
    for (const auto& u : t.unknowns) {
      if (u.name == "beta_tau") c.physics3.beta_tau_unknown = true;
      if (u.name == "beta_sigma") c.physics3.beta_sigma_unknown = true;
    }
    if (doc.contains("ensemble")) {
      read_if(doc["ensemble"], "n_ro", c.ensemble.n_ro);
      if (doc["ensemble"].contains("weight_variant"))
        c.ensemble.variant = doc["ensemble"]["weight_variant"] == "pole-symmetric" ? WeightVariant::PoleSymmetric
                                                                                   : WeightVariant::PaperVerbatim;
    }
  }
  try {
    t.validate();
    c.network().validate();
  } catch (const InvalidArgument& e) {
    throw SchemaError("/", e.what());
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  json doc;
  try {
    doc = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw SchemaError("/", std::string("not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

/// FNV-1a 64 of the compact dump with object keys sorted, so key order in
/// the file does not change the hash.
inline std::string config_hash(const json& doc) {
  const nlohmann::json canonical = nlohmann::json::parse(doc.dump());
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : canonical.dump()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace mdrf
