#pragma once

// Discrete loss, its parameter gradient and the two-step optimizer.
//
//   e_data^2 = sum_i k'_i (u_var(x'_i) - y_i)^2
//   e_pde^2  = sum_i k1_i |F(u)(x1_i)|^2
//   e_icbc^2 = sum_i k2_i |B(u)(x2_i)|^2  (+ the problem's gauge term)
//   total    = e_data^2 + lambda1 e_pde^2 + lambda2 e_icbc^2
//
// In step 1 only e_data^2 is optimized; the physics terms are still reported.
//
// The gradient runs every term through the batched JetEngine: one forward
// sweep per chunk, per-point residual adjoints from a tiny tape over the
// channel values, then one reverse sweep. Chunks are fixed at construction and
// reduced in chunk order, so results do not depend on the worker count.

#include <Eigen/Dense>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "mdrf/autodiff/batched.hpp"
#include "mdrf/autodiff/field_jets.hpp"
#include "mdrf/autodiff/tape.hpp"
#include "mdrf/errors.hpp"
#include "mdrf/network.hpp"
#include "mdrf/oracle.hpp"
#include "mdrf/parallel.hpp"
#include "mdrf/problem.hpp"
#include "mdrf/sampling.hpp"

namespace mdrf {

enum class Phase { Step1, Step2 };

struct UnknownCoefficient {
  std::string name;
  double initial = 0.0;
  double lower_bound = 0.0;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  std::size_t step1_iters = 5000;
  std::size_t step2_iters = 45000;
  double learning_rate = 1e-3;
  AdamConfig adam{};
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  std::uint64_t seed = 0;
  std::vector<UnknownCoefficient> unknowns{{"zeta", 0.0, 0.0}, {"zeta_tau", 0.0, 0.0}};
  std::size_t trace_every = 100;
  std::size_t chunk_size = 512;
  std::size_t threads = 0;  // 0: configured_threads()

  void validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
      throw InvalidArgument("train: learning_rate must be > 0");
    if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) throw InvalidArgument("train: lambda1 and lambda2 must be >= 0");
    if (trace_every == 0) throw InvalidArgument("train: trace_every must be >= 1");
    if (chunk_size == 0) throw InvalidArgument("train: chunk_size must be >= 1");
    if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0 && adam.epsilon > 0.0))
      throw InvalidArgument("train: invalid Adam hyperparameters");
  }

  double lower_bound(const std::string& name) const {
    for (const auto& u : unknowns)
      if (u.name == name) return u.lower_bound;
    return 0.0;
  }

  std::size_t worker_count() const { return threads == 0 ? configured_threads() : threads; }
};

/// Puts the configured unknowns into a network spec.
inline NetworkSpec with_unknowns(NetworkSpec spec, const std::vector<UnknownCoefficient>& unknowns) {
  spec.pde_param_names.clear();
  spec.pde_param_init.clear();
  for (const auto& u : unknowns) {
    spec.pde_param_names.push_back(u.name);
    spec.pde_param_init.push_back(u.initial);
  }
  return spec;
}

struct LossBreakdown {
  double e_data = 0.0;
  double e_pde = 0.0;
  double e_icbc = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double total = 0.0;
};

/// Weighted sums of squares per family (the squares of e_*).
struct TermSums {
  double data = 0.0;
  double pde = 0.0;
  double icbc = 0.0;
};

inline LossBreakdown make_breakdown(const TermSums& s, double lambda1, double lambda2, Phase phase) {
  LossBreakdown b;
  b.e_data = std::sqrt(s.data);
  b.e_pde = std::sqrt(s.pde);
  b.e_icbc = std::sqrt(s.icbc);
  b.lambda1 = lambda1;
  b.lambda2 = lambda2;
  b.total = phase == Phase::Step1 ? s.data : s.data + lambda1 * s.pde + lambda2 * s.icbc;
  return b;
}

// --- training set -------------------------------------------------------------

/// Observations grouped by point plus the collocation sets, in the chart's
/// coordinates.
template <std::size_t D>
struct TrainingSet {
  struct Row {
    std::size_t var = 0;
    double target = 0.0;
    double weight = 0.0;  // k'_i
  };
  std::vector<Point<D>> data_points;
  std::vector<std::size_t> row_begin{0};  // rows of point i: [row_begin[i], row_begin[i+1])
  std::vector<Row> rows;
  WeightedPoints<D> interior;
  std::array<WeightedPoints<D>, 4> boundary;  // by BoundaryTag

  std::size_t observation_count() const noexcept { return rows.size(); }
};

/// Data weights are obs.weight / (number of rows): e_data^2 is the
/// weighted mean squared misfit.
template <std::size_t D>
TrainingSet<D> make_training_set(const std::vector<Observation<D>>& obs, const WeightedPoints<D>& interior,
                                 const TaggedPoints<D>& boundary) {
  TrainingSet<D> s;
  std::map<Point<D>, std::vector<std::size_t>> by_point;
  std::vector<Point<D>> order;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    auto [it, fresh] = by_point.try_emplace(obs[i].point);
    if (fresh) order.push_back(obs[i].point);
    it->second.push_back(i);
  }
  const double inv_n = obs.empty() ? 0.0 : 1.0 / static_cast<double>(obs.size());
  for (const auto& p : order) {
    s.data_points.push_back(p);
    for (auto i : by_point[p]) {
      if (!(obs[i].weight > 0.0)) throw InvalidArgument("training set: observation weights must be > 0");
      if (!std::isfinite(obs[i].value)) throw InvalidArgument("training set: non-finite observation value");
      s.rows.push_back({obs[i].var, obs[i].value, obs[i].weight * inv_n});
    }
    s.row_begin.push_back(s.rows.size());
  }
  s.interior = interior;
  for (std::size_t i = 0; i < boundary.size(); ++i) {
    auto& piece = s.boundary[static_cast<std::size_t>(boundary.tags[i])];
    piece.points.push_back(boundary.points[i]);
    piece.weights.push_back(boundary.weights[i]);
  }
  return s;
}

template <std::size_t D>
TrainingSet<D> make_training_set(const CollocationSet<D>& colloc, const std::vector<Observation<D>>& obs) {
  return make_training_set(obs, colloc.interior, colloc.boundary);
}

// --- batched loss engine ----------------------------------------------------------

/// Counts residual point evaluations, split by whether a gradient was taken.
struct Instrumentation {
  std::atomic<std::size_t> data_gradient{0}, pde_gradient{0}, icbc_gradient{0};
  std::atomic<std::size_t> data_report{0}, pde_report{0}, icbc_report{0};

  void reset() {
    data_gradient = pde_gradient = icbc_gradient = 0;
    data_report = pde_report = icbc_report = 0;
  }
};

template <std::size_t D>
class LossEngine {
 public:
  enum Term : std::size_t { kData = 0, kPde = 1, kIcbc = 2, kGauge = 3 };

  LossEngine(const ParamLayout& layout, const Problem<D>& problem, const TrainingSet<D>& set,
             std::size_t chunk_size, std::size_t threads)
      : layout_(layout), problem_(&problem), set_(&set), threads_(std::max<std::size_t>(1, threads)) {
    if (layout_.spec().input_dim != D) throw InvalidArgument("loss: network input dimension does not match");
    if (layout_.field_count() != problem.field_count())
      throw InvalidArgument("loss: network field count does not match the problem");
    const std::size_t F = layout_.field_count();
    data_request_.assign(F, ad::ChannelSet::none());
    for (const auto& r : set.rows) {
      if (r.var >= F) throw InvalidArgument("loss: observation variable index out of range");
      data_request_[r.var] = ad::ChannelSet::value_only();
    }
    pde_request_ = problem.pde_request();
    for (std::size_t t = 0; t < 4; ++t) icbc_request_[t] = problem.icbc_request(static_cast<BoundaryTag>(t));
    if (const auto* g = problem.gauge()) {
      gauge_request_.assign(F, ad::ChannelSet::none());
      gauge_request_.at(g->field) = ad::ChannelSet::value_only();
    }

    auto add = [&](Term term, std::size_t tag, const std::vector<Point<D>>& pts) {
      for (std::size_t b = 0; b < pts.size(); b += chunk_size) {
        const std::size_t e = std::min(pts.size(), b + chunk_size);
        chunks_.push_back({term, tag, b, e, to_xi(pts, b, e), {}});
      }
    };
    add(kData, 0, set.data_points);
    add(kPde, 0, set.interior.points);
    for (std::size_t t = 0; t < 4; ++t) add(kIcbc, t, set.boundary[t].points);
    if (const auto* g = problem.gauge()) {
      std::size_t s = 0;
      while (s < g->slices.size()) {
        std::size_t e = s, n = 0;
        std::vector<Point<D>> pts;
        while (e < g->slices.size() && (e == s || n + g->slices[e].size() <= chunk_size)) {
          pts.insert(pts.end(), g->slices[e].begin(), g->slices[e].end());
          n += g->slices[e].size();
          ++e;
        }
        chunks_.push_back({kGauge, 0, s, e, to_xi(pts, 0, pts.size()), {}});
        s = e;
      }
    }
    workers_.resize(threads_);
  }

  LossEngine(const LossEngine&) = delete;
  LossEngine& operator=(const LossEngine&) = delete;

  const ParamLayout& layout() const noexcept { return layout_; }
  Instrumentation& instrumentation() noexcept { return stats_; }

  /// Evaluates the term families flagged in `active`. With a non-empty
  /// `grad`, writes d/d(theta) of sum_t grad_weight[t] * term_t into it.
  TermSums run(std::span<const double> theta, std::array<bool, 4> active, std::array<double, 4> grad_weight,
               std::span<double> grad) {
    const bool want_grad = !grad.empty();
    if (want_grad && grad.size() != theta.size()) throw InvalidArgument("loss: gradient buffer size mismatch");
    std::vector<std::size_t> todo;
    for (std::size_t c = 0; c < chunks_.size(); ++c) {
      if (active[chunks_[c].term]) todo.push_back(c);
    }
    std::vector<double> sums(todo.size(), 0.0);
    parallel_chunks(todo.size(), threads_, [&](std::size_t k, std::size_t worker) {
      Chunk& ch = chunks_[todo[k]];
      std::span<double> g;
      if (want_grad) {
        ch.grad.assign(theta.size(), 0.0);
        g = ch.grad;
      }
      sums[k] = eval_chunk(ch, theta, grad_weight[ch.term], g, workers_[worker]);
    });
    TermSums out;
    if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t k = 0; k < todo.size(); ++k) {
      const Chunk& ch = chunks_[todo[k]];
      switch (ch.term) {
        case kData: out.data += sums[k]; break;
        case kPde: out.pde += sums[k]; break;
        default: out.icbc += sums[k]; break;
      }
      if (want_grad) {
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += ch.grad[i];
      }
    }
    return out;
  }

  /// Every term that has points; no gradient.
  TermSums report(std::span<const double> theta) {
    return run(theta, {true, true, true, true}, {0, 0, 0, 0}, {});
  }

 private:
  struct Chunk {
    Term term;
    std::size_t tag;
    std::size_t begin, end;  // points (or gauge slices)
    Eigen::MatrixXd xi;
    std::vector<double> grad;
  };

  struct Worker {
    std::unique_ptr<ad::JetEngine> data, pde, gauge;
    std::array<std::unique_ptr<ad::JetEngine>, 4> icbc;
    std::vector<Eigen::MatrixXd> adj;
    ad::Tape tape;
  };

  Eigen::MatrixXd to_xi(const std::vector<Point<D>>& pts, std::size_t b, std::size_t e) const {
    Eigen::MatrixXd xi(static_cast<Eigen::Index>(D), static_cast<Eigen::Index>(e - b));
    const auto& n = problem_->normalizer();
    for (std::size_t i = b; i < e; ++i) {
      const auto q = n.normalize_unchecked(pts[i]);
      for (std::size_t k = 0; k < D; ++k) xi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i - b)) = q[k];
    }
    return xi;
  }

  ad::JetEngine& engine(std::unique_ptr<ad::JetEngine>& slot, const ad::DerivRequest& req) {
    if (!slot) slot = std::make_unique<ad::JetEngine>(layout_, req);
    return *slot;
  }

  void reset_adjoints(Worker& w, const ad::JetEngine& eng, Eigen::Index B) {
    w.adj.resize(layout_.field_count());
    for (std::size_t j = 0; j < layout_.field_count(); ++j) {
      const int nc = eng.channels(j).count();
      w.adj[j].setZero(1, nc * B);
    }
  }

  static std::string describe(const Point<D>& p) {
    std::ostringstream os;
    os << "(";
    for (std::size_t k = 0; k < D; ++k) os << (k ? ", " : "") << p[k];
    os << ")";
    return os.str();
  }

  double eval_chunk(Chunk& ch, std::span<const double> theta, double gw, std::span<double> grad, Worker& w) {
    const auto& slope = problem_->normalizer().scale();
    const bool want_grad = !grad.empty();
    const Eigen::Index B = ch.xi.cols();
    double sum = 0.0;

    if (ch.term == kData) {
      auto& eng = engine(w.data, data_request_);
      eng.forward(theta, ch.xi, slope);
      if (want_grad) reset_adjoints(w, eng, B);
      for (std::size_t i = ch.begin; i < ch.end; ++i) {
        const std::size_t col = i - ch.begin;
        for (std::size_t r = set_->row_begin[i]; r < set_->row_begin[i + 1]; ++r) {
          const auto& row = set_->rows[r];
          const double res = eng.value(row.var, col) - row.target;
          if (!std::isfinite(res))
            throw NumericError("loss: non-finite data residual at point " + describe(set_->data_points[i]));
          sum += row.weight * res * res;
          if (want_grad) w.adj[row.var](0, static_cast<Eigen::Index>(col)) += 2.0 * gw * row.weight * res;
        }
      }
      (want_grad ? stats_.data_gradient : stats_.data_report) += ch.end - ch.begin;
      if (want_grad) eng.backward(theta, w.adj, grad);
      return sum;
    }

    if (ch.term == kGauge) {
      const auto& g = *problem_->gauge();
      auto& eng = engine(w.gauge, gauge_request_);
      eng.forward(theta, ch.xi, slope);
      if (want_grad) reset_adjoints(w, eng, B);
      std::size_t col = 0;
      for (std::size_t s = ch.begin; s < ch.end; ++s) {
        const std::size_t n = g.slices[s].size();
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += eng.value(g.field, col + i);
        mean /= static_cast<double>(n);
        const double dev = mean - g.target;
        if (!std::isfinite(dev)) throw NumericError("loss: non-finite gauge residual in slice " + std::to_string(s));
        sum += g.slice_weight * dev * dev;
        if (want_grad) {
          const double a = 2.0 * gw * g.slice_weight * dev / static_cast<double>(n);
          for (std::size_t i = 0; i < n; ++i) w.adj[g.field](0, static_cast<Eigen::Index>(col + i)) += a;
        }
        col += n;
      }
      (want_grad ? stats_.icbc_gradient : stats_.icbc_report) += static_cast<std::size_t>(B);
      if (want_grad) eng.backward(theta, w.adj, grad);
      return sum;
    }

    const bool pde = ch.term == kPde;
    const auto& req = pde ? pde_request_ : icbc_request_[ch.tag];
    auto& eng = pde ? engine(w.pde, req) : engine(w.icbc[ch.tag], req);
    const auto& pts = pde ? set_->interior : set_->boundary[ch.tag];
    eng.forward(theta, ch.xi, slope);
    if (want_grad) reset_adjoints(w, eng, B);

    const std::size_t F = layout_.field_count();
    const std::size_t pde_off = layout_.pde_offset();
    const std::size_t n_coeff = layout_.pde_count();
    std::optional<ad::TapeScope> scope;
    if (want_grad) scope.emplace(w.tape);
    std::vector<Var> coeffs(n_coeff);
    std::vector<Var> res(pde ? problem_->pde_count() : 0);
    ad::FieldJets<Var, D> u(F);
    // (field, channel, node id) for every leaf, to scatter adjoints back
    struct Leaf {
      std::size_t field;
      int channel;
      std::int32_t id;
    };
    std::vector<Leaf> leaves;

    for (std::size_t i = ch.begin; i < ch.end; ++i) {
      const std::size_t col = i - ch.begin;
      leaves.clear();
      if (want_grad) w.tape.clear();
      auto leaf = [&](std::size_t f, int c) {
        const double v = eng.channel(f, c, col);
        if (!want_grad) return Var(v);
        Var x = Var::independent(v);
        leaves.push_back({f, c, x.id});
        return x;
      };
      for (std::size_t j = 0; j < F; ++j) {
        const auto& cl = eng.channels(j);
        u.available[j] = req[j];
        if (!req[j].active) continue;
        u.jets[j].v = leaf(j, 0);
        for (std::size_t k = 0; k < D; ++k) {
          if (cl.first(k) != ad::ChannelLayout::kAbsent) u.jets[j].d[k] = leaf(j, cl.first(k));
          if (cl.second(k) != ad::ChannelLayout::kAbsent) u.jets[j].dd[k] = leaf(j, cl.second(k));
        }
      }
      for (std::size_t m = 0; m < n_coeff; ++m)
        coeffs[m] = want_grad ? Var::independent(theta[pde_off + m]) : Var(theta[pde_off + m]);

      Var total(0.0);
      double sq = 0.0;
      auto accumulate = [&](const Var& r, std::size_t m) {
        if (!std::isfinite(r.v)) {
          throw NumericError(std::string("loss: non-finite ") + (pde ? "pde" : physics::to_string(static_cast<BoundaryTag>(ch.tag))) +
                             " residual " + std::to_string(m) + " at point " + describe(pts.points[i]));
        }
        sq += r.v * r.v;
        if (want_grad) total = total + r * r;
      };
      if (pde) {
        problem_->pde_residuals(u, coeffs, pts.points[i], res);
        for (std::size_t m = 0; m < res.size(); ++m) accumulate(res[m], m);
      } else {
        const auto r = problem_->icbc_residuals(u, pts.points[i], static_cast<BoundaryTag>(ch.tag));
        for (std::size_t m = 0; m < r.size(); ++m) accumulate(r[m], m);
      }
      const double k = pts.weights[i];
      sum += k * sq;
      if (want_grad && total.id >= 0) {
        const auto adj = w.tape.backward(total.id);
        const double s = gw * k;
        for (const auto& l : leaves)
          w.adj[l.field](0, static_cast<Eigen::Index>(l.channel) * B + static_cast<Eigen::Index>(col)) +=
              s * adj[static_cast<std::size_t>(l.id)];
        for (std::size_t m = 0; m < n_coeff; ++m) {
          if (coeffs[m].id >= 0) grad[pde_off + m] += s * adj[static_cast<std::size_t>(coeffs[m].id)];
        }
      }
    }
    auto& counter = pde ? (want_grad ? stats_.pde_gradient : stats_.pde_report)
                        : (want_grad ? stats_.icbc_gradient : stats_.icbc_report);
    counter += ch.end - ch.begin;
    if (want_grad) eng.backward(theta, w.adj, grad);
    return sum;
  }

  ParamLayout layout_;
  const Problem<D>* problem_;
  const TrainingSet<D>* set_;
  std::size_t threads_;
  ad::DerivRequest data_request_, pde_request_, gauge_request_;
  std::array<ad::DerivRequest, 4> icbc_request_;
  std::vector<Chunk> chunks_;
  std::vector<Worker> workers_;
  Instrumentation stats_;
};

/// Loss of a network at its current parameters.
template <std::size_t D>
LossBreakdown loss(const ModelParams& params, const Problem<D>& problem, const TrainingSet<D>& set,
                   const TrainConfig& cfg, Phase phase) {
  params.check_finite();
  LossEngine<D> eng(params.layout, problem, set, cfg.chunk_size, cfg.worker_count());
  return make_breakdown(eng.report(params.values), cfg.lambda1, cfg.lambda2, phase);
}

/// Field model given point-wise: returns jets (physical-coordinate
/// derivatives) with at least the requested entries.
template <std::size_t D>
using JetModel = std::function<ad::FieldJets<double, D>(const Point<D>&, const ad::DerivRequest&)>;

/// Loss of an arbitrary field model (e.g. the closed-form solution wrapped
/// as jets). `coeffs` plays the role of the trainable coefficients.
template <std::size_t D>
LossBreakdown loss(const JetModel<D>& model, std::span<const double> coeffs, const Problem<D>& problem,
                   const TrainingSet<D>& set, const TrainConfig& cfg, Phase phase) {
  auto as_var = [](const ad::FieldJets<double, D>& u) {
    ad::FieldJets<Var, D> v(u.size());
    v.available = u.available;
    for (std::size_t j = 0; j < u.size(); ++j) {
      v.jets[j].v = u.jets[j].v;
      for (std::size_t k = 0; k < D; ++k) {
        v.jets[j].d[k] = u.jets[j].d[k];
        v.jets[j].dd[k] = u.jets[j].dd[k];
      }
    }
    return v;
  };
  std::vector<Var> cv(coeffs.begin(), coeffs.end());
  TermSums s;
  const std::size_t F = problem.field_count();
  ad::DerivRequest values(F, ad::ChannelSet::value_only());
  for (std::size_t i = 0; i < set.data_points.size(); ++i) {
    const auto u = model(set.data_points[i], values);
    for (std::size_t r = set.row_begin[i]; r < set.row_begin[i + 1]; ++r) {
      const double e = u.val(set.rows[r].var) - set.rows[r].target;
      s.data += set.rows[r].weight * e * e;
    }
  }
  std::vector<Var> res(problem.pde_count());
  const auto preq = problem.pde_request();
  for (std::size_t i = 0; i < set.interior.size(); ++i) {
    problem.pde_residuals(as_var(model(set.interior.points[i], preq)), cv, set.interior.points[i], res);
    double sq = 0.0;
    for (const auto& r : res) sq += r.v * r.v;
    s.pde += set.interior.weights[i] * sq;
  }
  for (std::size_t t = 0; t < 4; ++t) {
    const auto tag = static_cast<BoundaryTag>(t);
    const auto req = problem.icbc_request(tag);
    const auto& piece = set.boundary[t];
    for (std::size_t i = 0; i < piece.size(); ++i) {
      const auto r = problem.icbc_residuals(as_var(model(piece.points[i], req)), piece.points[i], tag);
      double sq = 0.0;
      for (std::size_t m = 0; m < r.size(); ++m) sq += r[m].v * r[m].v;
      s.icbc += piece.weights[i] * sq;
    }
  }
  if (const auto* g = problem.gauge()) {
    ad::DerivRequest req(F, ad::ChannelSet::none());
    req[g->field] = ad::ChannelSet::value_only();
    for (const auto& slice : g->slices) {
      double mean = 0.0;
      for (const auto& q : slice) mean += model(q, req).val(g->field);
      mean /= static_cast<double>(slice.size());
      s.icbc += g->slice_weight * (mean - g->target) * (mean - g->target);
    }
  }
  return make_breakdown(s, cfg.lambda1, cfg.lambda2, phase);
}

// --- optimizer ----------------------------------------------------------------

class Adam {
 public:
  Adam(std::size_t n, double lr, AdamConfig c) : m_(n, 0.0), v_(n, 0.0), lr_(lr), c_(c) {}

  /// One step on indices [0, limit).
  void step(std::span<double> x, std::span<const double> g, std::size_t limit) {
    ++t_;
    const double b1t = 1.0 - std::pow(c_.beta1, static_cast<double>(t_));
    const double b2t = 1.0 - std::pow(c_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < limit; ++i) {
      m_[i] = c_.beta1 * m_[i] + (1.0 - c_.beta1) * g[i];
      v_[i] = c_.beta2 * v_[i] + (1.0 - c_.beta2) * g[i] * g[i];
      x[i] -= lr_ * (m_[i] / b1t) / (std::sqrt(v_[i] / b2t) + c_.epsilon);
    }
  }

  std::size_t steps() const noexcept { return t_; }

 private:
  std::vector<double> m_, v_;
  double lr_;
  AdamConfig c_;
  std::size_t t_ = 0;
};

// --- training loop --------------------------------------------------------------

struct TraceRecord {
  std::size_t iter = 0;
  Phase phase = Phase::Step1;
  LossBreakdown loss;
  std::vector<double> coefficients;
};

struct TrainTrace {
  std::vector<std::string> coefficient_names;
  std::vector<TraceRecord> records;
};

/// Non-finite loss or parameters; carries the trace up to the failure.
class TrainingDiverged : public NumericError {
 public:
  TrainingDiverged(const std::string& what, TrainTrace trace, std::size_t iter)
      : NumericError(what), trace_(std::move(trace)), iter_(iter) {}
  const TrainTrace& trace() const noexcept { return trace_; }
  std::size_t iteration() const noexcept { return iter_; }

 private:
  TrainTrace trace_;
  std::size_t iter_;
};

struct TrainResult {
  ModelParams params;
  TrainTrace trace;
  std::size_t pde_gradient_reads = 0;   // residual points read by the gradient
  std::size_t icbc_gradient_reads = 0;  // in either phase
  std::size_t step1_pde_gradient_reads = 0;
  std::size_t step1_icbc_gradient_reads = 0;
};

using TraceCallback = std::function<void(const TraceRecord&)>;

/// Runs step 1 (data only, coefficients frozen) then step 2 (full loss) on
/// `params`. Coefficients are projected onto their lower bounds after each
/// update. Physics terms with a zero multiplier are skipped, so lambda1 =
/// lambda2 = 0 reproduces an extension of step 1 exactly.
template <std::size_t D>
TrainResult train(ModelParams params, const Problem<D>& problem, const TrainingSet<D>& set, const TrainConfig& cfg,
                  const TraceCallback& on_trace = {}) {
  cfg.validate();
  params.check_finite();
  if (set.rows.empty()) throw InvalidArgument("train: observations are empty");
  if (cfg.step2_iters > 0 && cfg.lambda1 > 0.0 && set.interior.size() == 0)
    throw InvalidArgument("train: step 2 needs interior collocation points");

  LossEngine<D> eng(params.layout, problem, set, cfg.chunk_size, cfg.worker_count());
  const std::size_t P = params.size();
  const std::size_t net = params.layout.network_size();
  const auto& names = params.spec().pde_param_names;
  std::vector<double> lower(names.size());
  for (std::size_t m = 0; m < names.size(); ++m) lower[m] = cfg.lower_bound(names[m]);

  TrainResult result;
  result.trace.coefficient_names = names;
  Adam adam(P, cfg.learning_rate, cfg.adam);
  std::vector<double> grad(P, 0.0);
  const std::size_t total = cfg.step1_iters + cfg.step2_iters;

  auto phase_of = [&](std::size_t it) { return it < cfg.step1_iters ? Phase::Step1 : Phase::Step2; };
  auto record = [&](std::size_t it, Phase phase) {
    TraceRecord r;
    r.iter = it;
    r.phase = phase;
    r.loss = make_breakdown(eng.report(params.values), cfg.lambda1, cfg.lambda2, phase);
    r.coefficients.assign(params.pde_params().begin(), params.pde_params().end());
    result.trace.records.push_back(r);
    if (on_trace) on_trace(r);
    if (!std::isfinite(r.loss.total))
      throw TrainingDiverged("train: non-finite loss at iteration " + std::to_string(it), result.trace, it);
  };

  // The engine reports non-finite residuals as NumericError; keep the trace.
  auto guarded = [&](std::size_t it, auto&& body) {
    try {
      body();
    } catch (const TrainingDiverged&) {
      throw;
    } catch (const NumericError& e) {
      throw TrainingDiverged(std::string("train: ") + e.what() + " (iteration " + std::to_string(it) + ")",
                             result.trace, it);
    }
  };

  for (std::size_t it = 0; it < total; ++it) guarded(it, [&] {
    const Phase phase = phase_of(it);
    if (it % cfg.trace_every == 0) record(it, phase);
    const bool physics = phase == Phase::Step2;
    const std::array<bool, 4> active{true, physics && cfg.lambda1 > 0.0, physics && cfg.lambda2 > 0.0,
                                     physics && cfg.lambda2 > 0.0};
    const TermSums s = eng.run(params.values, active, {1.0, cfg.lambda1, cfg.lambda2, cfg.lambda2}, grad);
    const double objective = s.data + (active[1] ? cfg.lambda1 * s.pde : 0.0) + (active[2] ? cfg.lambda2 * s.icbc : 0.0);
    if (!std::isfinite(objective))
      throw TrainingDiverged("train: non-finite loss at iteration " + std::to_string(it), result.trace, it);
    adam.step(params.values, grad, physics ? P : net);
    for (std::size_t m = 0; m < names.size(); ++m) {
      double& c = params.values[net + m];
      if (c < lower[m]) c = lower[m];
    }
    for (double x : params.values) {
      if (!std::isfinite(x))
        throw TrainingDiverged("train: non-finite parameters after iteration " + std::to_string(it), result.trace, it);
    }
    if (phase == Phase::Step1 && it + 1 == cfg.step1_iters) {
      result.step1_pde_gradient_reads = eng.instrumentation().pde_gradient;
      result.step1_icbc_gradient_reads = eng.instrumentation().icbc_gradient;
    }
  });
  guarded(total, [&] {
    if (total > 0 && (result.trace.records.empty() || result.trace.records.back().iter != total)) record(total, phase_of(total - 1));
    if (total == 0) record(0, Phase::Step1);
  });
  result.pde_gradient_reads = eng.instrumentation().pde_gradient;
  result.icbc_gradient_reads = eng.instrumentation().icbc_gradient;
  result.params = std::move(params);
  return result;
}

template <std::size_t D>
TrainResult train(const NetworkSpec& spec, const Problem<D>& problem, const TrainingSet<D>& set,
                  const TrainConfig& cfg, const TraceCallback& on_trace = {}) {
  return train<D>(init(with_unknowns(spec, cfg.unknowns), cfg.seed), problem, set, cfg, on_trace);
}

// --- prediction -----------------------------------------------------------------

/// Values of every field (fields x n) at chart points.
template <std::size_t D>
Eigen::MatrixXd predict(const ModelParams& params, const Normalizer<D>& normalizer, std::span<const Point<D>> pts,
                        std::size_t threads = 0) {
  params.check_finite();
  const std::size_t F = params.layout.field_count();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(F), static_cast<Eigen::Index>(pts.size()));
  constexpr std::size_t kChunk = 1024;
  const std::size_t n_chunks = (pts.size() + kChunk - 1) / kChunk;
  if (threads == 0) threads = configured_threads();
  const ad::DerivRequest req(F, ad::ChannelSet::value_only());
  std::vector<std::unique_ptr<ad::JetEngine>> engines(std::max<std::size_t>(1, std::min(threads, n_chunks)));
  parallel_chunks(n_chunks, engines.size(), [&](std::size_t c, std::size_t w) {
    if (!engines[w]) engines[w] = std::make_unique<ad::JetEngine>(params.layout, req);
    const std::size_t b = c * kChunk, e = std::min(pts.size(), b + kChunk);
    Eigen::MatrixXd xi(static_cast<Eigen::Index>(D), static_cast<Eigen::Index>(e - b));
    for (std::size_t i = b; i < e; ++i) {
      const auto q = normalizer.normalize_unchecked(pts[i]);
      for (std::size_t k = 0; k < D; ++k) xi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i - b)) = q[k];
    }
    engines[w]->forward(params.values, xi, normalizer.scale());
    for (std::size_t j = 0; j < F; ++j)
      for (std::size_t i = b; i < e; ++i) {
        const double v = engines[w]->value(j, i - b);
        if (!std::isfinite(v)) throw NumericError("predict: non-finite output for field " + std::to_string(j));
        out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
      }
  });
  return out;
}

}  // namespace mdrf
