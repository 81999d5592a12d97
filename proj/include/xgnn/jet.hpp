#pragma once

#include <array>
#include <cmath>
#include <complex>

#include "xgnn/dual.hpp"

namespace xgnn {

// Truncated bivariate Taylor polynomial in (hx, hy) up to total degree K.
// Coefficient of hx^a hy^b is stored at idx(a, b) and equals ∂^{a,b} f / (a! b!).
template <class S, int K>
struct Jet {
  static constexpr int M = (K + 1) * (K + 2) / 2;
  std::array<S, M> c{};

  static constexpr int idx(int a, int b) { return (a + b) * (a + b + 1) / 2 + b; }

  Jet() { c.fill(S(0.0)); }
  explicit Jet(const S& v) { c.fill(S(0.0)); c[0] = v; }
  template <class T>
  static Jet promote(const Jet<T, K>& o) {
    Jet r;
    for (int i = 0; i < M; ++i) r.c[i] = S(o.c[i]);
    return r;
  }

  // affine seed: v + gx*hx + gy*hy
  static Jet affine(const S& v, double gx, double gy) {
    Jet r(v);
    if constexpr (K >= 1) {
      r.c[idx(1, 0)] = S(gx);
      r.c[idx(0, 1)] = S(gy);
    }
    return r;
  }

  const S& value() const { return c[0]; }
  S deriv(int a, int b) const {
    static constexpr double fact[] = {1, 1, 2, 6, 24, 120};
    return c[idx(a, b)] * (fact[a] * fact[b]);
  }

  Jet& operator+=(const Jet& o) { for (int i = 0; i < M; ++i) c[i] += o.c[i]; return *this; }
  Jet& operator-=(const Jet& o) { for (int i = 0; i < M; ++i) c[i] -= o.c[i]; return *this; }
  Jet& operator*=(const S& s) { for (auto& x : c) x *= s; return *this; }
};

template <class S, int K>
Jet<S, K> operator*(const Jet<S, K>& x, const Jet<S, K>& y) {
  using J = Jet<S, K>;
  J r;
  for (int d = 0; d <= K; ++d)
    for (int b = 0; b <= d; ++b) {
      const int a = d - b;
      S acc(0.0);
      for (int a1 = 0; a1 <= a; ++a1)
        for (int b1 = 0; b1 <= b; ++b1) acc += x.c[J::idx(a1, b1)] * y.c[J::idx(a - a1, b - b1)];
      r.c[J::idx(a, b)] = acc;
    }
  return r;
}

template <class S, int K> Jet<S, K> operator+(Jet<S, K> x, const Jet<S, K>& y) { return x += y; }
template <class S, int K> Jet<S, K> operator-(Jet<S, K> x, const Jet<S, K>& y) { return x -= y; }
template <class S, int K> Jet<S, K> operator-(Jet<S, K> x) { return x *= S(-1.0); }
template <class S, int K> Jet<S, K> operator*(Jet<S, K> x, const S& s) { return x *= s; }
template <class S, int K> Jet<S, K> operator*(const S& s, Jet<S, K> x) { return x *= s; }
template <class S, int K> Jet<S, K> operator+(Jet<S, K> x, const S& s) { x.c[0] += s; return x; }
template <class S, int K> Jet<S, K> operator-(Jet<S, K> x, const S& s) { x.c[0] -= s; return x; }
template <class S, int K>
  requires(!std::is_same_v<S, double>)
Jet<S, K> operator*(Jet<S, K> x, double s) { return x *= S(s); }
template <class S, int K>
  requires(!std::is_same_v<S, double>)
Jet<S, K> operator*(double s, Jet<S, K> x) { return x *= S(s); }

namespace detail {
// Σ_k tk[k] h^k with h the non-constant part of x; tk[k] = f^{(k)}(x0)/k!
template <class S, int K>
Jet<S, K> compose(const Jet<S, K>& x, const std::array<S, K + 1>& tk) {
  Jet<S, K> h = x;
  h.c[0] = S(0.0);
  Jet<S, K> r(tk[0]);
  Jet<S, K> p = h;
  for (int k = 1; k <= K; ++k) {
    Jet<S, K> t = p;
    t *= tk[k];
    r += t;
    if (k < K) p = p * h;
  }
  return r;
}
}  // namespace detail

template <class S, int K>
Jet<S, K> exp(const Jet<S, K>& x) {
  using std::exp;
  std::array<S, K + 1> t;
  S e = exp(x.c[0]);
  double f = 1.0;
  for (int k = 0; k <= K; ++k) { if (k) f *= k; t[k] = e * (1.0 / f); }
  return detail::compose(x, t);
}

template <class S, int K>
Jet<S, K> log(const Jet<S, K>& x) {
  using std::log;
  std::array<S, K + 1> t;
  t[0] = log(x.c[0]);
  S inv = S(1.0) / x.c[0];
  S p = inv;
  for (int k = 1; k <= K; ++k) {
    t[k] = p * ((k % 2 ? 1.0 : -1.0) / k);
    p = p * inv;
  }
  return detail::compose(x, t);
}

namespace detail {
// derivative cycle (f, f', f'', f''') -> Taylor coefficients
template <class S, int K>
std::array<S, K + 1> cycle4(const S& f0, const S& f1, const S& f2, const S& f3) {
  std::array<S, K + 1> t;
  const S cyc[4] = {f0, f1, f2, f3};
  double f = 1.0;
  for (int k = 0; k <= K; ++k) { if (k) f *= k; t[k] = cyc[k % 4] * (1.0 / f); }
  return t;
}
}  // namespace detail

template <class S, int K>
Jet<S, K> sin(const Jet<S, K>& x) {
  using std::sin; using std::cos;
  S s = sin(x.c[0]), c = cos(x.c[0]);
  return detail::compose(x, detail::cycle4<S, K>(s, c, -s, -c));
}
template <class S, int K>
Jet<S, K> cos(const Jet<S, K>& x) {
  using std::sin; using std::cos;
  S s = sin(x.c[0]), c = cos(x.c[0]);
  return detail::compose(x, detail::cycle4<S, K>(c, -s, -c, s));
}
template <class S, int K>
Jet<S, K> sinh(const Jet<S, K>& x) {
  using std::sinh; using std::cosh;
  S s = sinh(x.c[0]), c = cosh(x.c[0]);
  return detail::compose(x, detail::cycle4<S, K>(s, c, s, c));
}
template <class S, int K>
Jet<S, K> cosh(const Jet<S, K>& x) {
  using std::sinh; using std::cosh;
  S s = sinh(x.c[0]), c = cosh(x.c[0]);
  return detail::compose(x, detail::cycle4<S, K>(c, s, c, s));
}
template <class S, int K>
Jet<S, K> tanh(const Jet<S, K>& x) {
  using std::tanh;
  S t = tanh(x.c[0]);
  S s = S(1.0) - t * t;
  std::array<S, K + 1> tk;
  const S d[4] = {t, s, S(-2.0) * t * s, S(-2.0) * s * (S(1.0) - S(3.0) * t * t)};
  double f = 1.0;
  for (int k = 0; k <= K; ++k) { if (k) f *= k; tk[k] = d[k] * (1.0 / f); }
  return detail::compose(x, tk);
}

// Jets of (ln r, θ) about a point, with θ measured from the ray at angle
// `axis` (global) and taking values in (−π, π].
template <int K>
struct PolarJet {
  Jet<double, K> logr;
  Jet<double, K> theta;
  double r = 0.0;
};

template <int K>
PolarJet<K> polar_jet(double x, double y, double vx, double vy, double axis) {
  using J = Jet<double, K>;
  using C = std::complex<double>;
  PolarJet<K> out;
  const double dx = x - vx, dy = y - vy;
  const C rot = std::polar(1.0, -axis);
  const C z0 = C(dx, dy) * rot;
  out.r = std::abs(z0);
  out.logr.c[0] = std::log(out.r);
  out.theta.c[0] = std::arg(z0);
  // log(z0 + e^{-i axis}(hx + i hy)) expanded in powers of (hx + i hy)
  const C q = rot / z0;
  C qk = 1.0;
  for (int k = 1; k <= K; ++k) {
    qk *= q;
    const C ck = qk * ((k % 2 ? 1.0 : -1.0) / k);
    double binom = 1.0;
    C ib = 1.0;
    for (int b = 0; b <= k; ++b) {
      const C coef = ck * binom * ib;
      out.logr.c[J::idx(k - b, b)] = coef.real();
      out.theta.c[J::idx(k - b, b)] = coef.imag();
      binom = binom * (k - b) / (b + 1);
      ib *= C(0.0, 1.0);
    }
  }
  return out;
}

}  // namespace xgnn
