#pragma once

// Forward-mode second-order jets: a value together with its gradient and the
// pure second partials with respect to up to N input coordinates. Mixed
// partials are not carried; none of the residual operators need them.
//
// The scalar type T is generic so a jet can ride on top of the reverse-mode
// Var from tape.hpp (forward-over-reverse), which is how parameter gradients
// of derivative-containing losses are taken on the generic path.

#include <array>
#include <cmath>
#include <cstddef>

namespace mdrf::ad {

template <class T, std::size_t N>
struct Jet {
  T v{};
  std::array<T, N> d{};   // first partials
  std::array<T, N> dd{};  // pure second partials

  Jet() = default;
  Jet(double c) : v(c) {}  // NOLINT: implicit constants keep formulas readable
  Jet(T value, const std::array<T, N>& grad, const std::array<T, N>& hess)
      : v(value), d(grad), dd(hess) {}

  /// The k-th input coordinate itself, with d/dx_k = slope.
  static Jet variable(T value, std::size_t k, double slope = 1.0) {
    Jet j;
    j.v = value;
    j.d[k] = T(slope);
    return j;
  }

  Jet& operator+=(const Jet& o) {
    v = v + o.v;
    for (std::size_t k = 0; k < N; ++k) {
      d[k] = d[k] + o.d[k];
      dd[k] = dd[k] + o.dd[k];
    }
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    v = v - o.v;
    for (std::size_t k = 0; k < N; ++k) {
      d[k] = d[k] - o.d[k];
      dd[k] = dd[k] - o.dd[k];
    }
    return *this;
  }
};

namespace detail {
/// Applies a scalar function with derivatives f1 = f'(a.v), f2 = f''(a.v).
template <class T, std::size_t N>
Jet<T, N> chain(const Jet<T, N>& a, T f0, T f1, T f2) {
  Jet<T, N> r;
  r.v = f0;
  for (std::size_t k = 0; k < N; ++k) {
    r.d[k] = f1 * a.d[k];
    r.dd[k] = f1 * a.dd[k] + f2 * a.d[k] * a.d[k];
  }
  return r;
}
}  // namespace detail

template <class T, std::size_t N>
Jet<T, N> operator+(Jet<T, N> a, const Jet<T, N>& b) { return a += b; }
template <class T, std::size_t N>
Jet<T, N> operator-(Jet<T, N> a, const Jet<T, N>& b) { return a -= b; }

template <class T, std::size_t N>
Jet<T, N> operator-(const Jet<T, N>& a) {
  Jet<T, N> r;
  r.v = -a.v;
  for (std::size_t k = 0; k < N; ++k) {
    r.d[k] = -a.d[k];
    r.dd[k] = -a.dd[k];
  }
  return r;
}

template <class T, std::size_t N>
Jet<T, N> operator*(const Jet<T, N>& a, const Jet<T, N>& b) {
  Jet<T, N> r;
  r.v = a.v * b.v;
  for (std::size_t k = 0; k < N; ++k) {
    r.d[k] = a.v * b.d[k] + b.v * a.d[k];
    r.dd[k] = a.v * b.dd[k] + b.v * a.dd[k] + 2.0 * a.d[k] * b.d[k];
  }
  return r;
}

template <class T, std::size_t N>
Jet<T, N> operator*(const Jet<T, N>& a, double s) {
  Jet<T, N> r;
  r.v = a.v * s;
  for (std::size_t k = 0; k < N; ++k) {
    r.d[k] = a.d[k] * s;
    r.dd[k] = a.dd[k] * s;
  }
  return r;
}
template <class T, std::size_t N>
Jet<T, N> operator*(double s, const Jet<T, N>& a) { return a * s; }

template <class T, std::size_t N>
Jet<T, N> scale(const Jet<T, N>& a, const T& s) {
  Jet<T, N> r;
  r.v = a.v * s;
  for (std::size_t k = 0; k < N; ++k) {
    r.d[k] = a.d[k] * s;
    r.dd[k] = a.dd[k] * s;
  }
  return r;
}

template <class T, std::size_t N>
Jet<T, N> reciprocal(const Jet<T, N>& a) {
  const T inv = 1.0 / a.v;
  return detail::chain(a, inv, -inv * inv, 2.0 * inv * inv * inv);
}

template <class T, std::size_t N>
Jet<T, N> operator/(const Jet<T, N>& a, const Jet<T, N>& b) { return a * reciprocal(b); }

template <class T, std::size_t N>
Jet<T, N> tanh(const Jet<T, N>& a) {
  using std::tanh;
  const T t = tanh(a.v);
  const T s = 1.0 - t * t;
  return detail::chain(a, t, s, -2.0 * t * s);
}

template <class T, std::size_t N>
Jet<T, N> exp(const Jet<T, N>& a) {
  using std::exp;
  const T e = exp(a.v);
  return detail::chain(a, e, e, e);
}

template <class T, std::size_t N>
Jet<T, N> sin(const Jet<T, N>& a) {
  using std::sin;
  using std::cos;
  const T s = sin(a.v);
  return detail::chain(a, s, cos(a.v), -s);
}

template <class T, std::size_t N>
Jet<T, N> cos(const Jet<T, N>& a) {
  using std::sin;
  using std::cos;
  const T c = cos(a.v);
  return detail::chain(a, c, -sin(a.v), -c);
}

}  // namespace mdrf::ad
