#pragma once

// Parallel fully connected network sharing its first layer.
//
//   shared:   h = tanh(W_1 x + b_1)
//   field j:  u_j = C_K o tanh o C_{K-1} o ... o tanh o C_2 (h)
//
// Parameters live in one flat vector in canonical order:
//   W_1 (row-major, width x input_dim), b_1,
//   for each field j in spec order, for k = 2..K_j: W_k (row-major), b_k,
//   then the unknown equation coefficients.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "mdrf/autodiff/jet.hpp"
#include "mdrf/autodiff/tape.hpp"
#include "mdrf/errors.hpp"

namespace mdrf {

enum class Mode { TwoD, ThreeD };

inline const char* to_string(Mode m) { return m == Mode::TwoD ? "2d" : "3d"; }

namespace f2 {
enum : std::size_t { tau = 0, v = 1, w = 2, p = 3, count = 4 };
}
namespace f3 {
enum : std::size_t { tau = 0, sal = 1, w = 2, v_theta = 3, v_phi = 4, p = 5, count = 6 };
}

inline const std::vector<std::string>& field_names(Mode m) {
  static const std::vector<std::string> two{"tau", "v", "w", "p"};
  static const std::vector<std::string> three{"tau", "sal", "w", "v_theta", "v_phi", "p"};
  return m == Mode::TwoD ? two : three;
}

inline std::size_t field_index(Mode m, const std::string& name) {
  const auto& names = field_names(m);
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw InvalidArgument("unknown variable '" + name + "' for mode " + to_string(m));
  return static_cast<std::size_t>(it - names.begin());
}

struct SubnetSpec {
  std::string name;
  std::size_t depth = 5;    // K^(j): number of affine maps counting the shared one
  std::size_t width = 128;  // hidden width d^(j)
};

struct NetworkSpec {
  Mode mode = Mode::TwoD;
  std::size_t input_dim = 3;
  std::size_t shared_width = 128;
  std::vector<SubnetSpec> subnets;
  std::vector<std::string> pde_param_names;
  std::vector<double> pde_param_init;

  static NetworkSpec default_2d(std::size_t width = 128) {
    NetworkSpec s;
    s.mode = Mode::TwoD;
    s.input_dim = 3;
    s.shared_width = width;
    s.subnets = {{"tau", 3, width}, {"v", 5, width}, {"w", 5, width}, {"p", 5, width}};
    s.pde_param_names = {"zeta", "zeta_tau"};
    s.pde_param_init = {0.0, 0.0};
    return s;
  }

  static NetworkSpec default_3d(std::size_t width = 128) {
    NetworkSpec s;
    s.mode = Mode::ThreeD;
    s.input_dim = 4;
    s.shared_width = width;
    s.subnets = {{"tau", 3, width},     {"sal", 3, width},   {"w", 5, width},
                 {"v_theta", 5, width}, {"v_phi", 5, width}, {"p", 5, width}};
    s.pde_param_names = {"beta_tau", "beta_sigma"};
    s.pde_param_init = {0.0, 0.0};
    return s;
  }

  void validate() const {
    const std::size_t expected_inputs = mode == Mode::TwoD ? 3 : 4;
    if (input_dim != expected_inputs) throw InvalidArgument("network: input_dim does not match mode");
    if (shared_width == 0) throw InvalidArgument("network: shared_width must be >= 1");
    if (subnets.size() != field_names(mode).size())
      throw InvalidArgument("network: one subnet per modeled field is required");
    for (std::size_t j = 0; j < subnets.size(); ++j) {
      if (subnets[j].name != field_names(mode)[j])
        throw InvalidArgument("network: subnet " + std::to_string(j) + " must be '" + field_names(mode)[j] + "'");
      if (subnets[j].depth < 2) throw InvalidArgument("network: subnet depth must be >= 2");
      if (subnets[j].width == 0) throw InvalidArgument("network: subnet width must be >= 1");
    }
    if (pde_param_init.size() != pde_param_names.size())
      throw InvalidArgument("network: pde_param_init and pde_param_names differ in length");
  }
};

/// Offsets of every affine map inside the flat parameter vector.
struct AffineSlot {
  std::size_t in = 0, out = 0;
  std::size_t w_offset = 0, b_offset = 0;
  std::size_t size() const noexcept { return (in + 1) * out; }
};

class ParamLayout {
 public:
  ParamLayout() = default;
  explicit ParamLayout(const NetworkSpec& spec) : spec_(spec) {
    spec_.validate();
    std::size_t off = 0;
    auto place = [&off](std::size_t in, std::size_t out) {
      AffineSlot s{in, out, off, off + in * out};
      off += s.size();
      return s;
    };
    shared_ = place(spec_.input_dim, spec_.shared_width);
    subnets_.resize(spec_.subnets.size());
    for (std::size_t j = 0; j < spec_.subnets.size(); ++j) {
      const auto& sub = spec_.subnets[j];
      std::size_t in = spec_.shared_width;
      for (std::size_t k = 2; k <= sub.depth; ++k) {
        const std::size_t out = (k == sub.depth) ? 1 : sub.width;
        subnets_[j].push_back(place(in, out));
        in = out;
      }
    }
    network_size_ = off;
    pde_offset_ = off;
    total_ = off + spec_.pde_param_names.size();
  }

  const NetworkSpec& spec() const noexcept { return spec_; }
  const AffineSlot& shared() const noexcept { return shared_; }
  const std::vector<AffineSlot>& subnet(std::size_t j) const { return subnets_.at(j); }
  std::size_t field_count() const noexcept { return subnets_.size(); }
  std::size_t network_size() const noexcept { return network_size_; }
  std::size_t pde_offset() const noexcept { return pde_offset_; }
  std::size_t pde_count() const noexcept { return total_ - pde_offset_; }
  std::size_t total() const noexcept { return total_; }

  /// [begin, end) of field j's own parameters.
  std::pair<std::size_t, std::size_t> subnet_range(std::size_t j) const {
    const auto& s = subnets_.at(j);
    return {s.front().w_offset, s.back().b_offset + s.back().out};
  }

 private:
  NetworkSpec spec_;
  AffineSlot shared_;
  std::vector<std::vector<AffineSlot>> subnets_;
  std::size_t network_size_ = 0;
  std::size_t pde_offset_ = 0;
  std::size_t total_ = 0;
};

/// Closed-form parameter count, kept separate from ParamLayout's bookkeeping.
inline std::size_t parameter_count(const NetworkSpec& spec) {
  std::size_t n = (spec.input_dim + 1) * spec.shared_width;
  for (const auto& s : spec.subnets) {
    n += (spec.shared_width + 1) * (s.depth == 2 ? 1 : s.width);
    if (s.depth > 2) n += (s.width + 1) * s.width * (s.depth - 3) + (s.width + 1);
  }
  return n + spec.pde_param_names.size();
}

/// Network weights plus the unknown equation coefficients.
struct ModelParams {
  ParamLayout layout;
  std::vector<double> values;

  ModelParams() = default;
  explicit ModelParams(const NetworkSpec& spec) : layout(spec), values(layout.total(), 0.0) {
    std::copy(spec.pde_param_init.begin(), spec.pde_param_init.end(), values.begin() + pde_offset());
  }

  const NetworkSpec& spec() const noexcept { return layout.spec(); }
  std::size_t size() const noexcept { return values.size(); }
  std::size_t pde_offset() const noexcept { return layout.pde_offset(); }

  std::span<double> pde_params() { return std::span<double>(values).subspan(pde_offset()); }
  std::span<const double> pde_params() const { return std::span<const double>(values).subspan(pde_offset()); }

  double pde_param(const std::string& name) const {
    const auto& names = spec().pde_param_names;
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw InvalidArgument("unknown pde parameter '" + name + "'");
    return values[pde_offset() + static_cast<std::size_t>(it - names.begin())];
  }

  void check_finite() const {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i])) {
        throw NumericError("non-finite parameter at canonical index " + std::to_string(i));
      }
    }
  }
};

/// Glorot-uniform weights, zero biases, configured coefficient initial values.
inline ModelParams init(const NetworkSpec& spec, std::uint64_t seed) {
  ModelParams p(spec);
  std::mt19937_64 rng(seed);
  auto fill = [&](const AffineSlot& s) {
    const double a = std::sqrt(6.0 / static_cast<double>(s.in + s.out));
    std::uniform_real_distribution<double> u(-a, a);
    for (std::size_t i = 0; i < s.in * s.out; ++i) p.values[s.w_offset + i] = u(rng);
  };
  fill(p.layout.shared());
  for (std::size_t j = 0; j < p.layout.field_count(); ++j) {
    for (const auto& s : p.layout.subnet(j)) fill(s);
  }
  return p;
}

// --- generic single-point evaluation ---------------------------------------

namespace detail {

template <class X, class T>
X lift(const T& w) {
  if constexpr (std::is_same_v<X, T>) {
    return w;
  } else {
    X x{};
    x.v = w;
    return x;
  }
}

template <class X, class T>
std::vector<X> affine(const AffineSlot& s, std::span<const T> theta, const std::vector<X>& in) {
  std::vector<X> out(s.out);
  for (std::size_t o = 0; o < s.out; ++o) {
    X acc = lift<X>(theta[s.b_offset + o]);
    const std::size_t row = s.w_offset + o * s.in;
    for (std::size_t i = 0; i < s.in; ++i) acc = acc + in[i] * lift<X>(theta[row + i]);
    out[o] = acc;
  }
  return out;
}

}  // namespace detail

/// Evaluates every field at one (already normalized) input. X is the value
/// type flowing through the network (double, Var, or a Jet over either) and
/// T the parameter scalar.
template <class X, class T>
std::vector<X> forward_generic(const ParamLayout& layout, std::span<const T> theta,
                               std::span<const X> input) {
  using ad::tanh;
  using std::tanh;
  std::vector<X> x(input.begin(), input.end());
  std::vector<X> h = detail::affine(layout.shared(), theta, x);
  for (auto& e : h) e = tanh(e);
  std::vector<X> out;
  out.reserve(layout.field_count());
  for (std::size_t j = 0; j < layout.field_count(); ++j) {
    const auto& slots = layout.subnet(j);
    std::vector<X> a = h;
    for (std::size_t k = 0; k < slots.size(); ++k) {
      a = detail::affine(slots[k], theta, a);
      if (k + 1 < slots.size()) {
        for (auto& e : a) e = tanh(e);
      }
    }
    out.push_back(a[0]);
  }
  return out;
}

/// One finite real per field at a normalized point.
inline std::vector<double> forward(const ModelParams& params, std::span<const double> normalized_point) {
  if (normalized_point.size() != params.spec().input_dim)
    throw InvalidArgument("forward: point dimension does not match the network input");
  params.check_finite();
  auto out = forward_generic<double, double>(params.layout, params.values, normalized_point);
  for (std::size_t j = 0; j < out.size(); ++j) {
    if (!std::isfinite(out[j])) throw NumericError("forward: non-finite output for field " + std::to_string(j));
  }
  return out;
}

/// Reference state of the linear equation of state.
struct StateReference {
  double rho0 = 1025.0;
  double tau0 = 10.0;
  double sigma0 = 35.0;
};

/// rho = rho0 [1 - beta_tau (tau - tau0) + beta_sigma (sigma - sigma0)].
template <class T>
T density_from_state(const T& tau, const T& sigma, const T& beta_tau, const T& beta_sigma,
                     const StateReference& ref) {
  return ref.rho0 * (1.0 - beta_tau * (tau - ref.tau0) + beta_sigma * (sigma - ref.sigma0));
}

}  // namespace mdrf
