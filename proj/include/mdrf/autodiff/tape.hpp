#pragma once

// Minimal reverse-mode scalar AD. Every operation on a Var whose operands are
// live on the active tape records one node with at most two parents; Vars
// that are not on a tape behave as plain constants.

#include <cassert>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "mdrf/errors.hpp"

namespace mdrf::ad {

class Tape {
 public:
  struct Node {
    std::int32_t a;
    std::int32_t b;
    double wa;
    double wb;
  };

  std::int32_t push(std::int32_t a, double wa, std::int32_t b, double wb) {
    nodes_.push_back({a, b, wa, wb});
    return static_cast<std::int32_t>(nodes_.size() - 1);
  }
  std::int32_t leaf() { return push(-1, 0.0, -1, 0.0); }

  std::size_t size() const noexcept { return nodes_.size(); }
  void clear() noexcept { nodes_.clear(); }

  /// Adjoints of every node with respect to `root`. The buffer is reused.
  std::span<const double> backward(std::int32_t root) {
    adj_.assign(nodes_.size(), 0.0);
    if (root < 0) return adj_;
    adj_[static_cast<std::size_t>(root)] = 1.0;
    for (std::size_t i = static_cast<std::size_t>(root) + 1; i-- > 0;) {
      const double g = adj_[i];
      if (g == 0.0) continue;
      const Node& n = nodes_[i];
      if (n.a >= 0) adj_[static_cast<std::size_t>(n.a)] += g * n.wa;
      if (n.b >= 0) adj_[static_cast<std::size_t>(n.b)] += g * n.wb;
    }
    return adj_;
  }

  static Tape*& active() noexcept {
    thread_local Tape* tape = nullptr;
    return tape;
  }

 private:
  std::vector<Node> nodes_;
  std::vector<double> adj_;
};

/// Makes `tape` the recording target for the current thread.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape) : prev_(Tape::active()) { Tape::active() = &tape; }
  ~TapeScope() { Tape::active() = prev_; }
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* prev_;
};

struct Var {
  double v = 0.0;
  std::int32_t id = -1;

  Var() = default;
  Var(double c) : v(c) {}  // NOLINT: constants promote implicitly
  Var(double value, std::int32_t node) : v(value), id(node) {}

  /// A fresh independent variable on the active tape.
  static Var independent(double value) {
    Tape* t = Tape::active();
    assert(t && "Var::independent needs an active tape");
    return Var(value, t->leaf());
  }

  double value() const noexcept { return v; }
};

namespace detail {
inline Var record1(double value, const Var& a, double wa) {
  if (a.id < 0) return Var(value);
  return Var(value, Tape::active()->push(a.id, wa, -1, 0.0));
}
inline Var record2(double value, const Var& a, double wa, const Var& b, double wb) {
  if (a.id < 0 && b.id < 0) return Var(value);
  if (a.id < 0) return Var(value, Tape::active()->push(b.id, wb, -1, 0.0));
  if (b.id < 0) return Var(value, Tape::active()->push(a.id, wa, -1, 0.0));
  return Var(value, Tape::active()->push(a.id, wa, b.id, wb));
}
}  // namespace detail

inline Var operator+(const Var& a, const Var& b) { return detail::record2(a.v + b.v, a, 1.0, b, 1.0); }
inline Var operator-(const Var& a, const Var& b) { return detail::record2(a.v - b.v, a, 1.0, b, -1.0); }
inline Var operator*(const Var& a, const Var& b) { return detail::record2(a.v * b.v, a, b.v, b, a.v); }
inline Var operator/(const Var& a, const Var& b) {
  const double q = a.v / b.v;
  return detail::record2(q, a, 1.0 / b.v, b, -q / b.v);
}
inline Var operator-(const Var& a) { return detail::record1(-a.v, a, -1.0); }

inline Var operator+(const Var& a, double c) { return detail::record1(a.v + c, a, 1.0); }
inline Var operator+(double c, const Var& a) { return detail::record1(a.v + c, a, 1.0); }
inline Var operator-(const Var& a, double c) { return detail::record1(a.v - c, a, 1.0); }
inline Var operator-(double c, const Var& a) { return detail::record1(c - a.v, a, -1.0); }
inline Var operator*(const Var& a, double c) { return detail::record1(a.v * c, a, c); }
inline Var operator*(double c, const Var& a) { return detail::record1(a.v * c, a, c); }
inline Var operator/(const Var& a, double c) { return detail::record1(a.v / c, a, 1.0 / c); }
inline Var operator/(double c, const Var& a) {
  const double q = c / a.v;
  return detail::record1(q, a, -q / a.v);
}

inline Var& operator+=(Var& a, const Var& b) { return a = a + b; }
inline Var& operator-=(Var& a, const Var& b) { return a = a - b; }
inline Var& operator*=(Var& a, const Var& b) { return a = a * b; }

inline Var tanh(const Var& a) {
  const double t = std::tanh(a.v);
  return detail::record1(t, a, 1.0 - t * t);
}
inline Var exp(const Var& a) {
  const double e = std::exp(a.v);
  return detail::record1(e, a, e);
}
inline Var sin(const Var& a) { return detail::record1(std::sin(a.v), a, std::cos(a.v)); }
inline Var cos(const Var& a) { return detail::record1(std::cos(a.v), a, -std::sin(a.v)); }
inline Var sqrt(const Var& a) {
  const double s = std::sqrt(a.v);
  return detail::record1(s, a, 0.5 / s);
}

inline double value_of(double x) noexcept { return x; }
inline double value_of(const Var& x) noexcept { return x.v; }

/// Gradient of a scalar function of a flat parameter vector. `f` receives a
/// std::span<const Var> of independents and returns a Var.
struct GradientResult {
  double value = 0.0;
  std::vector<double> gradient;
};

template <class F>
GradientResult gradient_of(F&& f, std::span<const double> x) {
  Tape tape;
  TapeScope scope(tape);
  std::vector<Var> vars;
  vars.reserve(x.size());
  for (double xi : x) vars.push_back(Var::independent(xi));
  const Var out = f(std::span<const Var>(vars));
  GradientResult r;
  r.value = out.v;
  if (!std::isfinite(r.value)) throw NumericError("gradient_of: loss is not finite");
  r.gradient.assign(x.size(), 0.0);
  if (out.id >= 0) {
    auto adj = tape.backward(out.id);
    for (std::size_t i = 0; i < vars.size(); ++i) r.gradient[i] = adj[static_cast<std::size_t>(vars[i].id)];
  }
  return r;
}

}  // namespace mdrf::ad
