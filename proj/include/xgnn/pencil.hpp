#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "xgnn/errors.hpp"
#include "xgnn/geometry.hpp"

namespace xgnn {

struct PencilRoot {
  double xi = 0.0;
  double zeta = 0.0;
  double alpha = 0.0;
  std::string op;  // "laplace" or "biharmonic"
  double residual = 0.0;
  std::complex<double> lambda() const { return {xi, zeta}; }
};

inline std::vector<PencilRoot> laplace_exponents(double alpha, int count) {
  std::vector<PencilRoot> out;
  for (int j = 1; j <= count; ++j) out.push_back({j * kPi / alpha, 0.0, alpha, "laplace", 0.0});
  return out;
}

// sin²((λ−1)α) − (λ−1)² sin²α
inline std::complex<double> biharmonic_residual(std::complex<double> lam, double alpha) {
  const auto s = std::sin((lam - 1.0) * alpha);
  const double sa = std::sin(alpha);
  return s * s - (lam - 1.0) * (lam - 1.0) * sa * sa;
}

struct PencilSearch {
  double re_lo = 1.0, re_hi = 20.0, im_lo = 0.0, im_hi = 10.0;
  int grid = 40;
};

// Damped Newton on sin((λ−1)α) = ±(λ−1) sin α from a grid of starts.
inline std::vector<PencilRoot> biharmonic_exponents(double alpha, int count, bool want_complex,
                                                    const PencilSearch& box = {}) {
  using C = std::complex<double>;
  const double sa = std::sin(alpha);
  std::vector<C> found;
  for (int branch : {-1, 1}) {
    auto f = [&](C l) { return std::sin((l - 1.0) * alpha) - double(branch) * (l - 1.0) * sa; };
    auto df = [&](C l) { return alpha * std::cos((l - 1.0) * alpha) - double(branch) * sa; };
    for (int i = 0; i < box.grid; ++i)
      for (int j = 0; j < box.grid; ++j) {
        C l(box.re_lo + (box.re_hi - box.re_lo) * (i + 0.5) / box.grid,
            box.im_lo + (box.im_hi - box.im_lo) * (j + 0.5) / box.grid);
        if (!want_complex) l = C(l.real(), 0.0);
        bool ok = false;
        for (int it = 0; it < 100; ++it) {
          const C d = df(l);
          if (std::abs(d) == 0.0) break;
          C step = f(l) / d;
          if (std::abs(step) > 0.5) step *= 0.5 / std::abs(step);
          l -= step;
          if (!want_complex) l = C(l.real(), 0.0);
          if (!std::isfinite(l.real()) || !std::isfinite(l.imag())) break;
          if (std::abs(step) < 1e-14 * std::max(1.0, std::abs(l))) { ok = true; break; }
        }
        if (!ok) continue;
        if (l.imag() < 0) l = std::conj(l);
        if (std::abs(l.imag()) < 1e-11) l = C(l.real(), 0.0);
        if (!(l.real() > box.re_lo && l.real() < box.re_hi && l.imag() >= box.im_lo && l.imag() < box.im_hi)) continue;
        bool trivial = false;
        for (double k : {0.0, 1.0, 2.0}) trivial |= std::abs(l - C(k, 0.0)) < 1e-6;
        if (trivial) continue;
        if (!want_complex && l.imag() != 0.0) continue;
        if (std::abs(biharmonic_residual(l, alpha)) > 1e-10) continue;
        bool dup = false;
        for (auto& g : found) dup |= std::abs(g - l) < 1e-8 * std::max(1.0, std::abs(l));
        if (!dup) found.push_back(l);
      }
  }
  if (found.empty())
    throw NumericalError("biharmonic_exponents: no root in box Re(" + std::to_string(box.re_lo) + "," +
                         std::to_string(box.re_hi) + ") x Im[" + std::to_string(box.im_lo) + "," +
                         std::to_string(box.im_hi) + ")");
  std::sort(found.begin(), found.end(), [](C a, C b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  std::vector<PencilRoot> out;
  for (const C& l : found) {
    if (static_cast<int>(out.size()) >= count) break;
    out.push_back({l.real(), l.imag(), alpha, "biharmonic", std::abs(biharmonic_residual(l, alpha))});
  }
  return out;
}

}  // namespace xgnn
