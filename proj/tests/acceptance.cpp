// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--workdir DIR] [--only 1,4,5]
//
// Criteria 1-3, 7 and 8 go through the command-line tool; 4-6 call the
// library directly. Exit status is 0 only if every selected criterion passes.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "mdrf.hpp"

using namespace mdrf;
namespace fs = std::filesystem;

namespace {

fs::path g_work;

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
  void note(const std::string& what) { notes.push_back("     " + what); }
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string at(const std::string& name) { return (g_work / name).string(); }

void cli(const std::string& args, const std::string& log) {
  const std::string cmd = std::string(MDRF_CLI_PATH) + " " + args + " > " + at(log) + " 2>&1";
  const int status = std::system(cmd.c_str());
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  if (code != 0) throw std::runtime_error("'mdrf_cli " + args + "' exited with " + std::to_string(code) + ", see " + at(log));
}

std::string write_json(const std::string& name, const json& doc) {
  io::write_file(at(name), doc.dump(1) + "\n");
  return at(name);
}

// --- 2D study (criteria 1-3) ----------------------------------------------------------

constexpr int kSeeds = 5;
constexpr double kZeta = 0.01, kZetaTau = 0.02;

// 1000 samples of tau, v, w inside two rounded rectangles; p never observed;
// zeta and zeta_tau unknown, starting from 0.
json study_config(int seed, bool mechanism) {
  json c = json::parse(R"({
    "mode": "2d",
    "network": {"width": 32},
    "sampling": {"n_interior": 2000, "n_boundary_per_piece": 200, "mode": "uniform"},
    "training": {"step1_iters": 1000, "step2_iters": 9000, "trace_every": 100},
    "data": {"mask": [
      {"cx": 0.3, "cz": 0.3, "half_x": 0.22, "half_z": 0.22, "radius": 0.08},
      {"cx": 0.7, "cz": 0.7, "half_x": 0.22, "half_z": 0.22, "radius": 0.08}]}
  })");
  c["sampling"]["seed"] = seed + 1;
  c["training"]["seed"] = seed;
  if (!mechanism) c["training"]["lambda1"] = c["training"]["lambda2"] = 0.0;
  return c;
}

struct Study {
  std::map<std::string, std::map<std::string, std::optional<double>>> rmse;  // model -> var -> whole-domain RMSE
  std::vector<std::map<std::string, double>> coefficients;                    // per seed
  std::vector<io::CsvTable> traces;
};

const Study& study() {
  static std::optional<Study> cached;
  if (cached) return *cached;
  Study s;
  std::string snapshots;
  for (int seed = 0; seed < kSeeds; ++seed) {
    const std::string tag = std::to_string(seed);
    const std::string cfg = write_json("study_" + tag + ".json", study_config(seed, true));
    const std::string obs = at("obs_" + tag + ".csv");
    cli("simulate --config " + cfg + " --n 1000 --seed " + std::to_string(100 + seed) + " --out " + obs, "simulate.log");
    std::cerr << "  training seed " << seed << " of " << kSeeds << "\n";
    cli("train --quiet --config " + cfg + " --data " + obs + " --out " + at("full_" + tag), "train_" + tag + ".log");
    snapshots += " --snapshot " + at("full_" + tag + "/snapshot.json");
    const auto manifest = json::parse(io::read_file(at("full_" + tag + "/manifest.json")));
    s.coefficients.push_back(manifest["coefficients"].get<std::map<std::string, double>>());
    s.traces.push_back(io::parse_csv(io::read_file(at("full_" + tag + "/trace.csv")), "trace"));
  }
  std::cerr << "  training the no-mechanism variant\n";
  const std::string cfg0 = at("study_0.json");
  cli("train --quiet --config " + write_json("nomech.json", study_config(0, false)) + " --data " + at("obs_0.csv") +
          " --out " + at("nomech_0"),
      "train_nomech.log");
  snapshots += " --snapshot " + at("nomech_0/snapshot.json");
  std::cerr << "  evaluating\n";
  cli("evaluate --config " + cfg0 + " --region whole --points 100000 --gpr-data " + at("obs_0.csv") + snapshots +
          " --report " + at("eval/report.json"),
      "evaluate.log");
  const auto table = io::parse_csv(io::read_file(at("eval/report_rmse.csv")), "report_rmse.csv");
  for (const auto& row : table.rows) {
    if (row[1] != "whole") continue;
    s.rmse[row[0]][row[2]] = row[3] == "absent" ? std::nullopt : std::optional<double>(parse_real(row[3], "rmse"));
  }
  cached = std::move(s);
  return *cached;
}

Outcome criterion1() {
  Outcome o;
  const auto& s = study();
  for (const char* var : {"tau", "v", "w", "p"}) {
    std::vector<double> per_seed;
    for (int seed = 0; seed < kSeeds; ++seed) {
      const auto v = s.rmse.at("full_" + std::to_string(seed)).at(var);
      per_seed.push_back(v.value_or(INFINITY));
    }
    const double worst = *std::max_element(per_seed.begin(), per_seed.end());
    auto sorted = per_seed;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[kSeeds / 2];
    std::string list;
    for (double v : per_seed) list += (list.empty() ? "" : " ") + sci(v);
    o.check(worst <= 2e-2, std::string(var) + ": max RMSE " + sci(worst) + " <= 2e-2  [" + list + "]");
    o.check(median <= 1e-2, std::string(var) + ": median RMSE " + sci(median) + " <= 1e-2");
  }
  return o;
}

Outcome criterion2() {
  Outcome o;
  const auto& s = study();
  int inside = 0, zeta_below = 0, zeta_tau_above = 0;
  for (int seed = 0; seed < kSeeds; ++seed) {
    const double z = s.coefficients[seed].at("zeta"), zt = s.coefficients[seed].at("zeta_tau");
    const bool ok = z >= 0.005 && z <= 0.015 && zt >= 0.015 && zt <= 0.025;
    inside += ok;
    // Direction of approach: where the step-2 trajectory spends most records.
    int below = 0, above = 0, n = 0;
    for (const auto& row : s.traces[seed].rows) {
      if (std::stoul(row[0]) < 1000) continue;
      ++n;
      below += parse_real(row[5], "zeta") < kZeta;
      above += parse_real(row[6], "zeta_tau") > kZetaTau;
    }
    zeta_below += 2 * below > n;
    zeta_tau_above += 2 * above > n;
    o.note("seed " + std::to_string(seed) + ": zeta " + sci(z) + ", zeta_tau " + sci(zt) + (ok ? "" : "  (outside)"));
  }
  o.check(inside >= 4, std::to_string(inside) + " of 5 seeds inside zeta in [0.005, 0.015], zeta_tau in [0.015, 0.025]");
  o.note("reported only: zeta approaches from below in " + std::to_string(zeta_below) +
         " of 5 seeds, zeta_tau from above in " + std::to_string(zeta_tau_above) + " of 5");
  return o;
}

Outcome criterion3() {
  Outcome o;
  const auto& s = study();
  const auto& full = s.rmse.at("full_0");
  const auto& none = s.rmse.at("nomech_0");
  const auto& gpr = s.rmse.at("gpr");
  for (const char* var : {"tau", "v", "w"}) {
    const double f = full.at(var).value_or(INFINITY), n = none.at(var).value_or(INFINITY), g = gpr.at(var).value_or(INFINITY);
    o.check(f < n && f < g, std::string(var) + ": full " + sci(f) + " < no-mechanism " + sci(n) + " and GPR " + sci(g));
  }
  o.check(full.at("p").has_value() && none.at("p").has_value() && !gpr.at("p").has_value(),
          "p: full " + sci(full.at("p").value_or(NAN)) + ", no-mechanism " + sci(none.at("p").value_or(NAN)) +
              ", GPR " + (gpr.at("p") ? sci(*gpr.at("p")) : std::string("absent")));
  return o;
}

// --- closed-form residuals (criterion 4) ---------------------------------------------------

Outcome criterion4() {
  Outcome o;
  const physics::PdeConstants2D c;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double residual = 0.0, continuity = 0.0, hydrostatic = 0.0;
  using J = ad::Jet<double, 3>;
  for (int n = 0; n < 10000; ++n) {
    const Point2 q{u(rng), u(rng), u(rng)};
    const auto f = taylor_green<J>(J::variable(q[0], 0), J::variable(q[1], 1), J::variable(q[2], 2), c.forcing());
    ad::FieldJets<double, 3> fields(4);
    for (std::size_t j = 0; j < 4; ++j) {
      fields.jets[j] = f[j];
      fields.available[j] = ad::ChannelSet::with(0b111, 0b111);
    }
    for (double r : physics::residual_2d(fields, c, q)) residual = std::max(residual, std::fabs(r));
    continuity = std::max(continuity, std::fabs(fields.d(f2::v, 0) + fields.d(f2::w, 1)));
    hydrostatic = std::max(hydrostatic, std::fabs(fields.d(f2::p, 1) + fields.val(f2::tau)));
  }
  o.check(residual <= 1e-8, "max |residual| on 1e4 points " + sci(residual) + " <= 1e-8");
  o.check(continuity <= 1e-10, "max |v_x + w_z| " + sci(continuity) + " <= 1e-10");
  o.check(hydrostatic <= 1e-10, "max |p_z + tau| " + sci(hydrostatic) + " <= 1e-10");
  return o;
}

// --- finite differences (criterion 5) ---------------------------------------------------------

double rel_err(double a, double b, double floor) { return std::fabs(a - b) / std::max(std::fabs(b), floor); }

ModelParams perturbed_net(std::size_t width, std::uint64_t seed) {
  auto spec = NetworkSpec::default_2d(width);
  for (auto& s : spec.subnets) s.depth = 3;
  auto p = init(with_unknowns(spec, TrainConfig{}.unknowns), seed);
  std::mt19937_64 rng(seed + 100);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (std::size_t i = 0; i < p.layout.network_size(); ++i) p.values[i] += u(rng);
  p.pde_params()[0] = 0.013;
  p.pde_params()[1] = 0.027;
  return p;
}

Outcome criterion5() {
  Outcome o;
  {
    const auto p = perturbed_net(10, 3);
    const ad::DerivRequest all(4, ad::ChannelSet::with(0b111, 0b111));
    const double h = 1e-4;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-0.9, 0.9);
    double first = 0.0, second = 0.0;
    for (int n = 0; n < 50; ++n) {
      const Point2 q{u(rng), u(rng), u(rng)};
      const auto jets = ad::eval_with_input_derivs<3>(p, q, all);
      const auto f0 = forward(p, q);
      for (std::size_t k = 0; k < 3; ++k) {
        Point2 qp = q, qm = q;
        qp[k] += h;
        qm[k] -= h;
        const auto fp = forward(p, qp), fm = forward(p, qm);
        for (std::size_t j = 0; j < 4; ++j) {
          first = std::max(first, rel_err(jets.d(j, k), (fp[j] - fm[j]) / (2 * h), 1.0));
          second = std::max(second, rel_err(jets.dd(j, k), (fp[j] - 2 * f0[j] + fm[j]) / (h * h), 1.0));
        }
      }
    }
    o.check(first < 1e-5, "input first derivatives, max relative error " + sci(first) + " < 1e-5");
    o.check(second < 1e-5, "input second derivatives, max relative error " + sci(second) + " < 1e-5");
  }
  {
    // The trainer's reverse sweep over the whole composite loss, every parameter.
    const auto p = perturbed_net(3, 12);
    const Domain2D dom;
    const physics::PdeConstants2D c;
    const Problem2D prob(dom, c, physics::BoundaryData2D::taylor_green(c.forcing()), p.spec().pde_param_names,
                         GaugeGrid{true, 3, 3, 2});
    ObservationSpec os;
    os.n = 20;
    const auto set = make_training_set(generate_observations(os, c.forcing()), sample_interior<3>(dom, 30, 1),
                                       sample_boundary(dom, 6, 2));
    LossEngine<3> eng(p.layout, prob, set, 8, 1);
    std::vector<double> g(p.size());
    const std::array<double, 4> w{1.0, 0.7, 1.3, 1.3};
    eng.run(p.values, {true, true, true, true}, w, g);
    auto f = [&](const std::vector<double>& th) {
      const auto s = eng.report(th);
      return s.data + w[1] * s.pde + w[2] * s.icbc;
    };
    auto theta = p.values;
    const double scale = f(theta);
    const double h = 1e-5;
    double worst = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double keep = theta[i];
      theta[i] = keep + h;
      const double fp = f(theta);
      theta[i] = keep - h;
      const double fm = f(theta);
      theta[i] = keep;
      worst = std::max(worst, rel_err(g[i], (fp - fm) / (2 * h), 1e-3 * scale));
    }
    o.check(worst < 1e-4, "full-loss gradient over " + std::to_string(theta.size()) + " parameters, max relative error " +
                              sci(worst) + " < 1e-4");
  }
  return o;
}

// --- ensemble (criterion 6) ------------------------------------------------------------------

Outcome criterion6() {
  Outcome o;
  o.check(weight(kPi / 2, WeightVariant::PaperVerbatim) == 0.5, "weight(pi/2) == 0.5");

  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 10.0);
  std::uniform_real_distribution<double> th(0.0, kPi);
  std::uniform_int_distribution<int> nr(1, 5);
  std::size_t violations = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<ChartPrediction> p(static_cast<std::size_t>(nr(rng)));
    for (auto& c : p) {
      c.values = {g(rng), g(rng), g(rng), g(rng), g(rng), g(rng)};
      c.theta_r = th(rng);
    }
    for (auto variant : {WeightVariant::PaperVerbatim, WeightVariant::PoleSymmetric}) {
      const auto f = fuse(p, variant);
      for (std::size_t j = 0; j < 6; ++j) {
        double lo = p[0].values[j], hi = lo;
        for (const auto& c : p) {
          lo = std::min(lo, c.values[j]);
          hi = std::max(hi, c.values[j]);
        }
        violations += f[j] < lo || f[j] > hi;
      }
    }
  }
  o.check(violations == 0, "convexity on 1e4 random fixtures, " + std::to_string(violations) + " violations");

  // Reduced 3D fixture: two charts trained on synthetic spherical data.
  EnsembleSetup setup;
  setup.domain = Domain3D(Interval(-200, 0), Interval(0.3, 0.9), Interval(0.5, 1.3), Interval(0, 1));
  setup.network = with_unknowns(NetworkSpec::default_3d(16), {{"beta_tau", 0.0, 0.0}, {"beta_sigma", 0.0, 0.0}});
  setup.train.step1_iters = 600;
  setup.train.step2_iters = 100;
  setup.train.learning_rate = 1e-2;
  setup.train.unknowns = {{"beta_tau", 0.0, 0.0}, {"beta_sigma", 0.0, 0.0}};
  setup.train.threads = 0;
  setup.n_interior = 256;
  setup.n_boundary_per_piece = 16;
  setup.sampling_mode = SamplingMode::UniformRandom;
  ObservationSpec3D os;
  os.n = 300;
  os.domain = setup.domain;
  const auto model = train_ensemble(setup, generate_observations_3d(os), EnsembleSpec{2, WeightVariant::PaperVerbatim});

  os.seed = 77;
  os.n = 2000;
  os.variables = {f3::tau};
  std::vector<Point3> pts;
  for (const auto& ob : generate_observations_3d(os)) pts.push_back(ob.point);
  const SyntheticOcean ocean;

  // n_ro = 1: fusion returns the single sub-learner bit for bit.
  const auto& m0 = model.members()[0];
  const EnsemblePredictor single({m0}, WeightVariant::PaperVerbatim);
  const Eigen::MatrixXd direct = predict<4>(m0.params, m0.normalizer, pts, 1);
  o.check((single.predict_fused(pts, 1).array() == direct.array()).all(), "n_ro = 1 fusion is bitwise the sub-learner");

  const auto each = model.member_predictions(pts, 1);
  const Eigen::MatrixXd fused = model.predict_fused(pts, 1);
  const auto& names = field_names(Mode::ThreeD);
  for (std::size_t f = 0; f < 6; ++f) {
    auto rmse = [&](const Eigen::MatrixXd& m) {
      double s = 0.0;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const double e = m(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(i)) - ocean(pts[i])[f];
        s += e * e;
      }
      return std::sqrt(s / static_cast<double>(pts.size()));
    };
    const double a = rmse(each[0]), b = rmse(each[1]), fu = rmse(fused);
    o.check(fu <= std::max(a, b), names[f] + ": fused RMSE " + sci(fu) + " <= max(" + sci(a) + ", " + sci(b) + ")");
  }
  return o;
}

// --- determinism (criterion 7) -----------------------------------------------------------------

Outcome criterion7() {
  Outcome o;
  const json cfg = json::parse(R"({
    "mode": "2d",
    "network": {"width": 8},
    "sampling": {"n_interior": 200, "n_boundary_per_piece": 20, "seed": 4},
    "training": {"step1_iters": 50, "step2_iters": 50, "seed": 3, "trace_every": 10}
  })");
  const std::string path = write_json("det.json", cfg);
  cli("simulate --n 1000 --seed 42 --out " + at("det_a.csv"), "det.log");
  cli("simulate --n 1000 --seed 42 --out " + at("det_b.csv"), "det.log");
  o.check(io::read_file(at("det_a.csv")) == io::read_file(at("det_b.csv")), "simulate --n 1000 --seed 42 twice: identical bytes");
  for (const char* out : {"det_run1", "det_run2"})
    cli("train --quiet --threads 2 --config " + path + " --data " + at("det_a.csv") + " --out " + at(out), "det.log");
  o.check(io::read_file(at("det_run1/snapshot.json")) == io::read_file(at("det_run2/snapshot.json")),
          "two train runs, same config, seed and threads: identical snapshots");
  o.check(io::read_file(at("det_run1/trace.csv")) == io::read_file(at("det_run2/trace.csv")), "and identical traces");
  return o;
}

// --- 3D smoke run (criterion 8) ----------------------------------------------------------------

Outcome criterion8() {
  Outcome o;
  o.note("the global ocean figures need the full observational corpora and are not attempted");
  const json cfg = json::parse(R"({
    "mode": "3d",
    "domain": {"depth_m": [0, 200], "lat_deg": [35, 70], "lon_deg": [30, 75], "t": [0, 1]},
    "network": {"width": 8},
    "sampling": {"n_interior": 256, "n_boundary_per_piece": 16, "seed": 2},
    "training": {"step1_iters": 200, "step2_iters": 40, "learning_rate": 0.003, "seed": 1, "trace_every": 20},
    "ensemble": {"n_ro": 2}
  })");
  const std::string path = write_json("smoke3d.json", cfg);
  cli("simulate --config " + path + " --n 100 --seed 9 --out " + at("smoke_obs.csv"), "smoke.log");
  cli("train --quiet --config " + path + " --data " + at("smoke_obs.csv") + " --out " + at("smoke"), "smoke.log");
  cli("export-grid --snapshot " + at("smoke/snapshot.json") + " --grid-3d 3x4x4 --time 2000-01-01T12:00:00Z --out " +
          at("smoke_grid.csv"),
      "smoke.log");

  for (int r = 0; r < 2; ++r) {
    const auto t = io::parse_csv(io::read_file(at("smoke/trace_member" + std::to_string(r) + ".csv")), "trace");
    bool finite = true, monotone = true;
    double prev = INFINITY;
    for (const auto& row : t.rows) {
      for (std::size_t k = 1; k < 5; ++k) {
        try {
          (void)parse_real(row[k], "trace");
        } catch (const InvalidArgument&) {
          finite = false;
        }
      }
      if (!finite) break;
      // the record at iteration k is the state before update k, in the phase of update k
      if (std::stoul(row[0]) >= 200) continue;
      const double total = parse_real(row[4], "total");
      monotone = monotone && total <= prev;
      prev = total;
    }
    const std::string m = "member " + std::to_string(r);
    o.check(finite && !t.rows.empty(), m + ": finite e_data, e_pde, e_icbc and total in all " +
                                           std::to_string(t.rows.size()) + " trace records");
    o.check(monotone, m + ": step-1 total non-increasing across trace records");
  }
  const auto grid = io::parse_csv(io::read_file(at("smoke_grid.csv")), "grid");
  bool ok = grid.rows.size() == 48 && grid.header.back() == "rho";
  for (const auto& row : grid.rows)
    for (std::size_t k = 4; k < row.size(); ++k) ok = ok && std::isfinite(parse_real(row[k], "grid"));
  o.check(ok, "export-grid: 48 rows with finite fields and rho");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  g_work = fs::current_path() / "acceptance_work";
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--workdir" && i + 1 < argc) {
      g_work = argv[++i];
    } else if (a == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      for (std::string tok; std::getline(ss, tok, ',');) only.insert(std::stoi(tok));
    } else {
      std::cerr << "usage: acceptance [--workdir DIR] [--only 1,2,...]\n";
      return 2;
    }
  }
  fs::create_directories(g_work / "eval");

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"Taylor-Green reconstruction accuracy", criterion1},
      {"inverse-parameter recovery", criterion2},
      {"mechanism advantage over no-mechanism and GPR", criterion3},
      {"residual of the closed-form solution", criterion4},
      {"autodiff against finite differences", criterion5},
      {"ensemble invariants", criterion6},
      {"determinism", criterion7},
      {"3D smoke run", criterion8},
  };
  bool all = true;
  std::vector<std::string> summary;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    std::cerr << "criterion " << id << ": " << criteria[k].first << "\n";
    const auto t0 = std::chrono::steady_clock::now();
    Outcome r;
    try {
      r = criteria[k].second();
    } catch (const std::exception& e) {
      r.check(false, std::string("error: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char line[160];
    std::snprintf(line, sizeof line, "criterion %d: %s  %s (%.0f s)", id, r.pass ? "PASS" : "FAIL",
                  criteria[k].first.c_str(), secs);
    std::cout << line << "\n";
    for (const auto& n : r.notes) std::cout << "    " << n << "\n";
    std::cout.flush();
    summary.push_back(line);
    all = all && r.pass;
  }
  std::cout << "\n";
  for (const auto& s : summary) std::cout << s << "\n";
  return all ? 0 : 1;
}
