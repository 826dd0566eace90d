// mdrf command-line tool: simulate -> train -> evaluate -> export-grid.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 I/O error,
// 3 numeric failure.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mdrf.hpp"

namespace fs = std::filesystem;
using mdrf::json;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit { kOk = 0, kUsage = 1, kIo = 2, kNumeric = 3 };

class UsageError : public mdrf::InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

std::size_t resolve_threads(std::optional<std::size_t> flag, std::size_t config_threads = 0) {
  if (flag && *flag > 0) return *flag;
  if (config_threads > 0) return config_threads;
  return mdrf::configured_threads();
}

void write_manifest(const std::string& path, const std::string& command, json extra, double wall_seconds) {
  json m;
  m["command"] = command;
  m["version"] = kVersion;
  for (auto& [k, v] : extra.items()) m[k] = v;
  m["wall_time_s"] = wall_seconds;
  mdrf::io::write_file(path, m.dump(1) + "\n");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& f : mdrf::io::split_fields(s)) out.push_back(mdrf::parse_real(f, what));
  return out;
}

std::optional<mdrf::RunConfig> maybe_config(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return mdrf::load_config(path);
}

// --- simulate -------------------------------------------------------------------

struct SimulateArgs {
  std::string out, mode = "2d", config, vars;
  long long n = 1000;
  std::uint64_t seed = 42;
  double noise_sd = 0.0;
  std::vector<std::string> masks;
};

int cmd_simulate(const SimulateArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  if (a.n < 1) throw UsageError("--n must be >= 1");
  if (a.noise_sd < 0.0) throw UsageError("--noise-sd must be >= 0");
  const auto cfg = maybe_config(a.config);
  const mdrf::Mode mode = cfg ? cfg->mode : (a.mode == "3d" ? mdrf::Mode::ThreeD : mdrf::Mode::TwoD);
  std::vector<std::size_t> vars;
  if (!a.vars.empty())
    for (const auto& v : mdrf::io::split_fields(a.vars)) vars.push_back(mdrf::field_index(mode, v));
  std::string csv;
  if (mode == mdrf::Mode::TwoD) {
    mdrf::ObservationSpec spec;
    spec.n = static_cast<std::size_t>(a.n);
    spec.seed = a.seed;
    spec.noise_sd = a.noise_sd;
    if (!vars.empty()) spec.variables = vars;
    mdrf::TaylorGreenParams tg;
    if (cfg) {
      spec.domain = cfg->domain2;
      spec.mask = cfg->mask;
      tg = cfg->physics2.forcing();
    }
    for (const auto& m : a.masks) {
      const auto p = parse_list(m, "--mask");
      if (p.size() != 5) throw UsageError("--mask expects cx,cz,half_x,half_z,radius");
      spec.mask.push_back({p[0], p[1], p[2], p[3], p[4]});
    }
    csv = mdrf::io::write_observations(mdrf::generate_observations(spec, tg));
  } else {
    if (!a.masks.empty()) throw UsageError("--mask applies to 2d mode only");
    mdrf::ObservationSpec3D spec;
    spec.n = static_cast<std::size_t>(a.n);
    spec.seed = a.seed;
    spec.noise_sd = a.noise_sd;
    if (!vars.empty()) spec.variables = vars;
    mdrf::io::TimeAxis axis;
    if (cfg) {
      spec.domain = cfg->domain3;
      axis = cfg->time_axis;
    }
    csv = mdrf::io::write_observations(mdrf::generate_observations_3d(spec), axis);
  }
  mdrf::io::write_file(a.out, csv);
  write_manifest(a.out + ".manifest.json", "simulate",
                 {{"mode", mode == mdrf::Mode::TwoD ? "2d" : "3d"},
                  {"seed", a.seed},
                  {"threads", 1},
                  {"config_hash", cfg ? json(mdrf::config_hash(cfg->source)) : json(nullptr)},
                  {"rows", std::count(csv.begin(), csv.end(), '\n') - 1}},
                 seconds_since(t0));
  return kOk;
}

// --- train ------------------------------------------------------------------------

struct TrainArgs {
  std::string config, data, out;
  std::optional<std::size_t> threads;
  bool quiet = false;
};

int cmd_train(const TrainArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  auto cfg = mdrf::load_config(a.config);
  const std::string data = !a.data.empty() ? a.data : cfg.data_path.value_or("");
  const std::string out = !a.out.empty() ? a.out : cfg.out_path.value_or("");
  if (data.empty()) throw UsageError("no observation file: pass --data or set paths.data");
  if (out.empty()) throw UsageError("no output directory: pass --out or set paths.out");
  cfg.train.threads = resolve_threads(a.threads, cfg.train.threads);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw mdrf::IoError("cannot create output directory '" + out + "': " + ec.message());
  const std::string text = mdrf::io::read_file(data);

  json manifest = {{"mode", cfg.mode == mdrf::Mode::TwoD ? "2d" : "3d"},
                   {"config_hash", mdrf::config_hash(cfg.source)},
                   {"seeds", {{"training", cfg.train.seed}, {"sampling", cfg.sampling.seed}}},
                   {"threads", cfg.train.threads},
                   {"data", data},
                   {"config", cfg.source}};
  auto progress = [&](const mdrf::TraceRecord& r) {
    if (a.quiet) return;
    std::fprintf(stderr, "iter %zu  total %.6e  e_data %.4e  e_pde %.4e  e_icbc %.4e\n", r.iter, r.loss.total,
                 r.loss.e_data, r.loss.e_pde, r.loss.e_icbc);
  };
  auto finish = [&](const std::string& status) {
    manifest["status"] = status;
    write_manifest(out + "/manifest.json", "train", manifest, seconds_since(t0));
  };

  if (cfg.mode == mdrf::Mode::TwoD) {
    const auto obs = mdrf::io::read_observations_2d(text, data);
    const auto colloc_interior =
        mdrf::sample_interior<3>(cfg.domain2, cfg.sampling.n_interior, cfg.sampling.seed, cfg.sampling.mode);
    const auto colloc_boundary = mdrf::sample_boundary(cfg.domain2, cfg.sampling.n_boundary_per_piece, cfg.sampling.seed + 1);
    const auto net = cfg.network();
    mdrf::Problem2D problem(cfg.domain2, cfg.physics2,
                            mdrf::physics::BoundaryData2D::taylor_green(cfg.physics2.forcing(), cfg.dirichlet_fields),
                            net.pde_param_names, cfg.gauge);
    const auto set = mdrf::make_training_set(obs, colloc_interior, colloc_boundary);
    try {
      const auto result = mdrf::train<3>(net, problem, set, cfg.train, progress);
      mdrf::io::write_file(out + "/snapshot.json", mdrf::write_snapshot(mdrf::make_snapshot(result.params, cfg.domain2)));
      mdrf::io::write_file(out + "/trace.csv", mdrf::io::write_trace(result.trace));
      json coeffs = json::object();
      for (std::size_t k = 0; k < net.pde_param_names.size(); ++k)
        coeffs[net.pde_param_names[k]] = result.params.pde_params()[k];
      manifest["coefficients"] = coeffs;
    } catch (const mdrf::TrainingDiverged& e) {
      mdrf::io::write_file(out + "/trace.csv", mdrf::io::write_trace(e.trace()));
      manifest["error"] = e.what();
      finish("diverged");
      throw;
    }
  } else {
    const auto obs = mdrf::io::read_observations_3d(text, cfg.time_axis, data);
    mdrf::EnsembleSetup setup;
    setup.domain = cfg.domain3;
    setup.constants = cfg.physics3;
    setup.network = cfg.network();
    setup.train = cfg.train;
    setup.n_interior = cfg.sampling.n_interior;
    setup.n_boundary_per_piece = cfg.sampling.n_boundary_per_piece;
    setup.sampling_seed = cfg.sampling.seed;
    setup.sampling_mode = cfg.sampling.mode;
    try {
      const auto model = mdrf::train_ensemble(setup, obs, cfg.ensemble, progress);
      mdrf::DensityConstants density{cfg.physics3.state, cfg.physics3.beta_tau, cfg.physics3.beta_sigma};
      const auto& names = setup.network.pde_param_names;
      json coeffs = json::array();
      for (const auto& name : {std::string("beta_tau"), std::string("beta_sigma")}) {
        if (std::find(names.begin(), names.end(), name) == names.end()) continue;
        double mean = 0.0;
        for (const auto& m : model.members()) mean += m.params.pde_param(name);
        mean /= static_cast<double>(model.members().size());
        (name == "beta_tau" ? density.beta_tau : density.beta_sigma) = mean;
      }
      for (std::size_t r = 0; r < model.members().size(); ++r) {
        const auto& m = model.members()[r];
        mdrf::io::write_file(out + "/trace_member" + std::to_string(r) + ".csv", mdrf::io::write_trace(m.trace));
        json c = json::object();
        for (const auto& n : names) c[n] = m.params.pde_param(n);
        coeffs.push_back({{"rotation_angle", m.chart.angle()}, {"coefficients", c}});
      }
      manifest["members"] = coeffs;
      mdrf::io::write_file(out + "/snapshot.json",
                           mdrf::write_snapshot(mdrf::make_snapshot(model, cfg.domain3, density, cfg.time_axis)));
    } catch (const mdrf::SubLearnerFailed& e) {
      manifest["error"] = e.what();
      finish("failed");
      throw;
    }
  }
  finish("ok");
  return kOk;
}

// --- evaluate -----------------------------------------------------------------------

struct EvaluateArgs {
  std::vector<std::string> snapshots;
  std::string truth = "oracle", report, region, box, config, gpr_data;
  std::size_t points = 100000;
  std::uint64_t seed = 7;
  std::optional<std::size_t> threads;
};

std::string model_name(const std::string& path) {
  // train writes <dir>/snapshot.json; name the model after the directory
  const fs::path p(path);
  if (p.filename() == "snapshot.json" && p.has_parent_path() && !p.parent_path().filename().empty())
    return p.parent_path().filename().string();
  return p.stem().string();
}

void write_report(const std::string& path, const mdrf::ComparisonReport& rep) {
  mdrf::io::write_file(path, mdrf::to_json(rep).dump(1) + "\n");
  const fs::path p(path);
  const std::string base = (p.parent_path() / p.stem()).string();
  mdrf::io::write_file(base + "_rmse.csv", mdrf::rmse_csv(rep));
  mdrf::io::write_file(base + "_time.csv", mdrf::time_curve_csv(rep));
  mdrf::io::write_file(base + "_profiles.csv", mdrf::profiles_csv(rep));
}

int cmd_evaluate(const EvaluateArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  if (a.snapshots.empty()) throw UsageError("at least one --snapshot is required");
  const std::size_t threads = resolve_threads(a.threads);
  std::vector<mdrf::Snapshot> snaps;
  for (const auto& s : a.snapshots) snaps.push_back(mdrf::read_snapshot(mdrf::io::read_file(s)));
  const mdrf::Mode mode = snaps[0].mode;
  for (const auto& s : snaps)
    if (s.mode != mode || s.domain != snaps[0].domain)
      throw mdrf::SchemaError("/", "all snapshots must share mode and domain");
  const auto cfg = maybe_config(a.config);
  if (cfg && cfg->mode != mode) throw mdrf::SchemaError("/mode", "config mode does not match the snapshot");
  const auto& names = mdrf::field_names(mode);
  const std::vector<bool> all(names.size(), true);

  mdrf::ComparisonReport rep;
  rep.variables = names;
  rep.seed = a.seed;

  if (mode == mdrf::Mode::TwoD) {
    std::vector<mdrf::Predictor<3>> models;
    for (std::size_t k = 0; k < snaps.size(); ++k) {
      models.push_back({model_name(a.snapshots[k]), all, [&, k](std::span<const mdrf::Point2> pts) {
                          return snaps[k].predict_2d(pts, threads);
                        }});
    }
    std::optional<mdrf::GprModel<3>> gpr;
    if (!a.gpr_data.empty()) {
      const auto obs = mdrf::io::read_observations_2d(mdrf::io::read_file(a.gpr_data), a.gpr_data);
      std::vector<std::size_t> vars;
      for (std::size_t j = 0; j < names.size(); ++j)
        if (std::any_of(obs.begin(), obs.end(), [j](const auto& o) { return o.var == j; })) vars.push_back(j);
      gpr = mdrf::gpr_fit<3>(obs, vars);
      std::vector<bool> provides(names.size(), false);
      for (auto v : vars) provides[v] = true;
      models.push_back({"gpr", provides, [&gpr, F = names.size()](std::span<const mdrf::Point2> pts) {
                          Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(F),
                                                                      static_cast<Eigen::Index>(pts.size()));
                          for (std::size_t j = 0; j < F; ++j) {
                            if (!gpr->has(j)) continue;
                            const auto mean = mdrf::gpr_predict(*gpr, j, pts).first;
                            for (std::size_t i = 0; i < pts.size(); ++i)
                              out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = mean[i];
                          }
                          return out;
                        }});
    }
    const auto domain = snaps[0].domain2();
    if (a.truth == "oracle") {
      const auto tg = cfg ? cfg->physics2.forcing() : mdrf::TaylorGreenParams{};
      auto regions = mdrf::standard_regions_2d(domain, cfg ? cfg->mask : std::vector<mdrf::RoundedRect>{});
      if (a.region == "custom") {
        const auto b = parse_list(a.box, "--box");
        if (b.size() != 6) throw UsageError("--box expects x0,x1,z0,z1,t0,t1");
        regions = {{"custom", "user box " + a.box,
                    mdrf::Domain2D({b[0], b[1]}, {b[2], b[3]}, {b[4], b[5]}), {}}};
      } else if (!a.region.empty()) {
        std::erase_if(regions, [&](const auto& r) { return r.name != a.region; });
        if (regions.empty()) throw UsageError("unknown or unavailable region '" + a.region + "'");
      }
      mdrf::CompareOptions opt;
      opt.region_points = a.points;
      opt.seed = a.seed;
      rep = mdrf::compare(models, mdrf::taylor_green_truth(tg), regions, domain, opt);
    } else {
      const auto labeled = mdrf::io::read_observations_2d(mdrf::io::read_file(a.truth), a.truth);
      std::vector<mdrf::Point2> pts;
      for (const auto& o : labeled) pts.push_back(o.point);
      rep.region_points = pts.size();
      rep.region_docs = {{"labeled", "rows of " + a.truth}};
      for (const auto& m : models) {
        mdrf::ModelReport mr;
        mr.name = m.name;
        mr.regions.emplace_back("labeled", mdrf::evaluate_labeled<3>(m.predict(pts), labeled, names, m.provides));
        mr.curve.rmse.assign(names.size(), {});
        rep.models.push_back(std::move(mr));
      }
    }
  } else {
    if (!a.gpr_data.empty()) throw UsageError("--gpr-data applies to 2d mode only");
    std::vector<mdrf::EnsemblePredictor> preds;
    for (const auto& s : snaps) preds.push_back(s.ensemble());
    const auto domain = snaps[0].domain3();
    std::vector<mdrf::Point3> pts;
    std::vector<mdrf::Observation3> labeled;
    Eigen::MatrixXd truth;
    if (a.truth == "oracle") {
      mdrf::Region<4> whole{"whole", "training box", domain, {}};
      pts = mdrf::sample_region(whole, a.points, a.seed);
      truth.resize(static_cast<Eigen::Index>(names.size()), static_cast<Eigen::Index>(pts.size()));
      const mdrf::SyntheticOcean ocean;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto u = ocean(pts[i]);
        for (std::size_t j = 0; j < names.size(); ++j) truth(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = u[j];
      }
      rep.region_docs = {{"whole", "training box"}};
    } else {
      labeled = mdrf::io::read_observations_3d(mdrf::io::read_file(a.truth), snaps[0].time_axis, a.truth);
      for (const auto& o : labeled) pts.push_back(o.point);
      rep.region_docs = {{"labeled", "rows of " + a.truth}};
    }
    rep.region_points = pts.size();
    for (std::size_t k = 0; k < snaps.size(); ++k) {
      mdrf::ModelReport mr;
      mr.name = model_name(a.snapshots[k]);
      const Eigen::MatrixXd p = preds[k].predict_fused(pts, threads);
      if (a.truth == "oracle") {
        mr.regions.emplace_back("whole", mdrf::evaluate<4>(p, truth, pts, names, all, {}, {0, 1, 2, 3}, 10,
                                                           {"r_a", "theta", "phi", "t"}, domain));
      } else {
        mr.regions.emplace_back("labeled", mdrf::evaluate_labeled<4>(p, labeled, names, all));
      }
      mr.curve.rmse.assign(names.size(), {});
      rep.models.push_back(std::move(mr));
    }
  }
  write_report(a.report, rep);
  write_manifest(a.report + ".manifest.json", "evaluate",
                 {{"snapshots", a.snapshots},
                  {"truth", a.truth},
                  {"seed", a.seed},
                  {"threads", threads},
                  {"config_hash", cfg ? json(mdrf::config_hash(cfg->source)) : json(nullptr)}},
                 seconds_since(t0));
  return kOk;
}

// --- export-grid ------------------------------------------------------------------------

struct ExportArgs {
  std::string snapshot, out, grid, grid3d, time, bounds;
  bool allow_extrapolation = false;
  std::optional<std::size_t> threads;
};

std::vector<std::size_t> parse_counts(const std::string& s, const std::string& what) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find('x', start);
    const std::string part = s.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
    std::size_t v = 0;
    try {
      std::size_t used = 0;
      v = std::stoul(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw UsageError(what + ": '" + s + "' is not of the form NxM[xK]");
    }
    if (v == 0) throw UsageError(what + ": counts must be >= 1");
    out.push_back(v);
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<double> nodes(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

int cmd_export_grid(const ExportArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t threads = resolve_threads(a.threads);
  const auto snap = mdrf::read_snapshot(mdrf::io::read_file(a.snapshot));
  std::string csv;
  std::size_t rows = 0;
  if (snap.mode == mdrf::Mode::TwoD) {
    if (a.grid.empty()) throw UsageError("2d snapshots need --grid NXxNZ[xNT]");
    const auto counts = parse_counts(a.grid, "--grid");
    if (counts.size() < 2 || counts.size() > 3) throw UsageError("--grid expects NXxNZ or NXxNZxNT");
    const auto d = snap.domain2();
    std::vector<double> box{d.x().lower, d.x().upper, d.z().lower, d.z().upper, d.t().lower, d.t().upper};
    if (!a.bounds.empty()) {
      box = parse_list(a.bounds, "--bounds");
      if (box.size() != 6) throw UsageError("--bounds expects x0,x1,z0,z1,t0,t1");
    }
    std::vector<double> ts;
    if (counts.size() == 3) {
      ts = nodes(box[4], box[5], counts[2]);
    } else {
      if (a.time.empty()) throw UsageError("--grid NXxNZ needs --time T");
      ts = {mdrf::parse_real(a.time, "--time")};
    }
    std::vector<mdrf::Point2> pts;
    for (double t : ts)
      for (double x : nodes(box[0], box[1], counts[0]))
        for (double z : nodes(box[2], box[3], counts[1])) pts.push_back({x, z, t});
    for (const auto& q : pts)
      if (!d.contains(q) && !a.allow_extrapolation)
        throw UsageError("grid leaves the trained domain; pass --allow-extrapolation to export anyway");
    const Eigen::MatrixXd v = snap.predict_2d(pts, threads);
    csv = "x,z,t,tau,v,w,p\n";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      csv += mdrf::format_real(pts[i][0]) + "," + mdrf::format_real(pts[i][1]) + "," + mdrf::format_real(pts[i][2]);
      for (Eigen::Index j = 0; j < v.rows(); ++j) csv += "," + mdrf::format_real(v(j, static_cast<Eigen::Index>(i)));
      csv += "\n";
    }
    rows = pts.size();
  } else {
    if (a.grid3d.empty() || a.time.empty()) throw UsageError("3d snapshots need --grid-3d NDEPTHxNLATxNLON and --time ISO8601");
    const auto counts = parse_counts(a.grid3d, "--grid-3d");
    if (counts.size() != 3) throw UsageError("--grid-3d expects NDEPTHxNLATxNLON");
    const auto d = snap.domain3();
    std::vector<double> box{-d.ra().upper, -d.ra().lower, mdrf::io::theta_to_lat(d.theta().upper),
                            mdrf::io::theta_to_lat(d.theta().lower), mdrf::io::phi_to_lon(d.phi().lower),
                            mdrf::io::phi_to_lon(d.phi().upper)};
    if (!a.bounds.empty()) {
      box = parse_list(a.bounds, "--bounds");
      if (box.size() != 6) throw UsageError("--bounds expects depth0,depth1,lat0,lat1,lon0,lon1");
    }
    const double t = snap.time_axis.to_model(a.time);
    std::vector<mdrf::Point3> pts;
    std::vector<std::array<double, 3>> coords;
    for (double depth : nodes(box[0], box[1], counts[0]))
      for (double lat : nodes(box[2], box[3], counts[1]))
        for (double lon : nodes(box[4], box[5], counts[2])) {
          const double phi = lon * mdrf::kPi / 180.0;  // the trained range, not reduced mod 2 pi
          pts.push_back({depth == 0.0 ? 0.0 : -depth, mdrf::io::lat_to_theta(lat), phi, t});
          coords.push_back({depth, lat, lon});
        }
    for (const auto& q : pts)
      if (!d.contains(q) && !a.allow_extrapolation)
        throw UsageError("grid leaves the trained domain; pass --allow-extrapolation to export anyway");
    for (auto& q : pts) q[2] = mdrf::io::lon_to_phi(q[2] * 180.0 / mdrf::kPi);
    const Eigen::MatrixXd v = snap.ensemble().predict_fused(pts, threads);
    const auto& dens = snap.density;
    csv = "depth_m,lat_deg,lon_deg,time_iso8601,tau,sal,w,v_theta,v_phi,p,rho\n";
    const std::string iso = snap.time_axis.to_iso(t);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto c = static_cast<Eigen::Index>(i);
      csv += mdrf::format_real(coords[i][0]) + "," + mdrf::format_real(coords[i][1]) + "," +
             mdrf::format_real(coords[i][2]) + "," + iso;
      for (Eigen::Index j = 0; j < v.rows(); ++j) csv += "," + mdrf::format_real(v(j, c));
      const double rho = mdrf::density_from_state(v(mdrf::f3::tau, c), v(mdrf::f3::sal, c), dens.beta_tau,
                                                  dens.beta_sigma, dens.state);
      csv += "," + mdrf::format_real(rho) + "\n";
    }
    rows = pts.size();
  }
  mdrf::io::write_file(a.out, csv);
  write_manifest(a.out + ".manifest.json", "export-grid",
                 {{"snapshot", a.snapshot}, {"rows", rows}, {"threads", threads}, {"seed", nullptr}},
                 seconds_since(t0));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mdrf: physics-informed field reconstruction"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Write a synthetic observation CSV");
  s->add_option("--out", sim.out, "Output CSV path")->required();
  s->add_option("--n", sim.n, "Number of sample points");
  s->add_option("--seed", sim.seed, "Random seed");
  s->add_option("--noise-sd", sim.noise_sd, "Gaussian noise standard deviation");
  s->add_option("--mask", sim.masks, "Rounded-rectangle data mask cx,cz,half_x,half_z,radius (repeatable)");
  s->add_option("--mode", sim.mode, "2d or 3d (ignored when --config is given)")->check(CLI::IsMember({"2d", "3d"}));
  s->add_option("--config", sim.config, "Run configuration (domain, true constants, mask)");
  s->add_option("--vars", sim.vars, "Comma-separated variables (default: all but p)");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a model and write snapshot, trace and manifest");
  t->add_option("--config", tr.config, "Run configuration (JSON)")->required();
  t->add_option("--data", tr.data, "Observation CSV");
  t->add_option("--out", tr.out, "Output directory");
  t->add_option("--threads", tr.threads, "Worker threads (default: config, then MDRF_THREADS, then hardware)");
  t->add_flag("--quiet", tr.quiet, "No progress output");

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Compare snapshots against the closed-form truth or a labeled CSV");
  e->add_option("--snapshot", ev.snapshots, "Snapshot file (repeatable)")->required();
  e->add_option("--truth", ev.truth, "'oracle' or a labeled observation CSV");
  e->add_option("--report", ev.report, "Report JSON path; CSV tables are written beside it")->required();
  e->add_option("--region", ev.region, "whole, data, extended-space, extended-time or custom (default: all)");
  e->add_option("--box", ev.box, "Custom region x0,x1,z0,z1,t0,t1");
  e->add_option("--config", ev.config, "Run configuration (true constants, data mask)");
  e->add_option("--gpr-data", ev.gpr_data, "Also fit and report the GPR baseline on this observation CSV");
  e->add_option("--points", ev.points, "Evaluation points per region");
  e->add_option("--seed", ev.seed, "Seed of the evaluation points");
  e->add_option("--threads", ev.threads, "Worker threads");

  ExportArgs ex;
  auto* x = app.add_subcommand("export-grid", "Write model fields on a regular grid");
  x->add_option("--snapshot", ex.snapshot, "Snapshot file")->required();
  x->add_option("--out", ex.out, "Output CSV path")->required();
  x->add_option("--grid", ex.grid, "2d grid NXxNZ[xNT]");
  x->add_option("--grid-3d", ex.grid3d, "3d grid NDEPTHxNLATxNLON");
  x->add_option("--time", ex.time, "Time of the slice (number in 2d, ISO-8601 in 3d)");
  x->add_option("--bounds", ex.bounds, "Grid box; default is the trained domain");
  x->add_flag("--allow-extrapolation", ex.allow_extrapolation, "Permit grid points outside the trained domain");
  x->add_option("--threads", ex.threads, "Worker threads");

  std::string schema_mode = "2d";
  auto* sc = app.add_subcommand("schema", "Print the configuration JSON Schema");
  sc->add_option("--mode", schema_mode, "2d or 3d")->check(CLI::IsMember({"2d", "3d"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (s->parsed()) return cmd_simulate(sim);
    if (t->parsed()) return cmd_train(tr);
    if (e->parsed()) return cmd_evaluate(ev);
    if (x->parsed()) return cmd_export_grid(ex);
    if (sc->parsed()) {
      std::cout << mdrf::config_schema(schema_mode == "2d" ? mdrf::Mode::TwoD : mdrf::Mode::ThreeD).dump(2) << "\n";
      return kOk;
    }
  } catch (const mdrf::IoError& err) {
    std::cerr << "I/O error: " << err.what() << "\n";
    return kIo;
  } catch (const mdrf::NumericError& err) {
    std::cerr << "numeric failure: " << err.what() << "\n";
    return kNumeric;
  } catch (const mdrf::SchemaError& err) {
    std::cerr << "configuration error at " << err.what() << "\n";
    return kUsage;
  } catch (const mdrf::Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
