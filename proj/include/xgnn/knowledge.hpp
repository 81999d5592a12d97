#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "xgnn/dual.hpp"
#include "xgnn/errors.hpp"
#include "xgnn/fields.hpp"
#include "xgnn/geometry.hpp"
#include "xgnn/jet.hpp"
#include "xgnn/parallel.hpp"
#include "xgnn/pencil.hpp"

namespace xgnn {

enum class Family { PoissonCorner, StokesNoslip, StokesMoffatt, StokesDirichlet4 };

inline std::string family_name(Family f) {
  switch (f) {
    case Family::PoissonCorner: return "poisson_corner";
    case Family::StokesNoslip: return "stokes_noslip";
    case Family::StokesMoffatt: return "stokes_moffatt";
    case Family::StokesDirichlet4: return "stokes_dirichlet4";
  }
  return "?";
}

inline Family parse_family(const std::string& s) {
  if (s == "poisson_corner") return Family::PoissonCorner;
  if (s == "stokes_noslip") return Family::StokesNoslip;
  if (s == "stokes_moffatt") return Family::StokesMoffatt;
  if (s == "stokes_dirichlet4") return Family::StokesDirichlet4;
  throw ConfigError("unknown knowledge family '" + s + "'");
}

struct KnowledgeTerm {
  Family family = Family::PoissonCorner;
  std::complex<double> mu{1.0, 0.0};
  bool trainable = false;
  int corner = 0;
  std::optional<Cutoff> cutoff;
  int id = 0;  // stable identifier for traces
};

inline int component_count(Family f) { return f == Family::PoissonCorner ? 1 : 3; }

// Linear coefficients carried by one term: dirichlet4 has A1..A4, doubled into
// real and imaginary parts when μ is complex.
inline int column_count(const KnowledgeTerm& t) {
  if (t.family != Family::StokesDirichlet4) return 1;
  return t.mu.imag() != 0.0 ? 8 : 4;
}

namespace detail {

template <class S, int K>
struct CJet {
  Jet<S, K> re, im;
};
template <class S, int K>
CJet<S, K> cmul(const CJet<S, K>& a, const CJet<S, K>& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
template <class S, int K>
CJet<S, K> cscale(const CJet<S, K>& a, const S& re, const S& im) {
  return {a.re * re - a.im * im, a.re * im + a.im * re};
}

template <class S, int K>
Jet<S, K> cutoff_jet(const Jet<double, K>& logr, const Cutoff& cut) {
  Jet<double, K> r = exp(logr);
  auto f = cutoff_eval_full(r.value(), cut);
  std::array<double, K + 1> tk;
  const double fact[] = {1, 1, 2, 6};
  for (int k = 0; k <= K; ++k) tk[k] = f[k] / fact[k];
  return Jet<S, K>::promote(compose(r, tk));
}

// Streamfunction/pressure pairs (ψ, p) per column in the bisector frame.
// T = θ measured from the bisector, a = half the interior angle.
template <class S>
std::vector<std::array<Jet<S, 3>, 2>> stokes_columns(Family fam, const Jet<double, 3>& Ld, const Jet<double, 3>& Td,
                                                     double a, const S& xi, const S& zeta, bool with_imag) {
  using J = Jet<S, 3>;
  using std::cos; using std::sin; using std::cosh; using std::sinh;
  const J L = J::promote(Ld), T = J::promote(Td);
  std::vector<std::array<J, 2>> out;
  const S xm2 = xi - 2.0, xm1 = xi - 1.0;
  const J rxi = exp(L * xi);
  const J rxm2 = exp(L * xm2);

  if (fam == Family::StokesNoslip) {
    const S ca = cos(xi * a), cb = cos(xm2 * a);
    J psi = rxi * (cos(T * xm2) * ca - cos(T * xi) * cb);
    J p = rxm2 * sin(T * xm2) * (S(-4.0) * xm1 * ca);
    out.push_back({psi, p});
    return out;
  }

  const J czl = cos(L * zeta), szl = sin(L * zeta);
  const J chz = cosh(T * zeta), shz = sinh(T * zeta);
  const J cx2 = cos(T * xm2), sx2 = sin(T * xm2), cx = cos(T * xi), sx = sin(T * xi);
  const J c2 = cx2 * chz, s2 = sx2 * shz;  // Re, −Im of cos((λ−2)θ)
  const J c4 = cx * chz, s4 = sx * shz;    // Re, −Im of cos(λθ)
  const J Sr = sx2 * chz, Si = cx2 * shz;  // Re, Im of sin((λ−2)θ)
  const J Sr4 = sx * chz, Si4 = cx * shz;  // Re, Im of sin(λθ)

  if (fam == Family::StokesMoffatt) {
    const S C1 = cos(xi * a) * cosh(zeta * a), S1 = sin(xi * a) * sinh(zeta * a);
    const S C3 = cos(xm2 * a) * cosh(zeta * a), S3 = sin(xm2 * a) * sinh(zeta * a);
    J rePsi = c2 * C1 - s2 * S1 - c4 * C3 + s4 * S3;
    J imPsi = s4 * C3 + c4 * S3 - s2 * C1 - c2 * S1;
    J psi = rxi * (czl * rePsi - szl * imPsi);
    J A = czl * (S(0.0) - xm1) + szl * zeta;
    J B = czl * zeta + szl * xm1;
    J p = rxm2 * ((A * Sr + B * Si) * C1 + (A * Si - B * Sr) * S1) * S(4.0);
    out.push_back({psi, p});
    return out;
  }

  // dirichlet4: Ψ1 = cos((λ−2)θ), Ψ2 = cos(λθ), Ψ3 = sin((λ−2)θ), Ψ4 = sin(λθ)
  const CJet<S, 3> rl{rxi * czl, rxi * szl};
  const CJet<S, 3> rl2{rxm2 * czl, rxm2 * szl};
  const CJet<S, 3> psi_t[4] = {{c2, -s2}, {c4, -s4}, {Sr, Si}, {Sr4, Si4}};
  const J zero;
  const CJet<S, 3> p1 = cscale(cmul(rl2, CJet<S, 3>{Sr, Si}), S(-4.0) * xm1, S(-4.0) * zeta);
  const CJet<S, 3> p3 = cscale(cmul(rl2, CJet<S, 3>{c2, -s2}), S(4.0) * xm1, S(4.0) * zeta);
  const CJet<S, 3> pr[4] = {p1, {zero, zero}, p3, {zero, zero}};
  for (int i = 0; i < 4; ++i) {
    CJet<S, 3> w = cmul(rl, psi_t[i]);
    out.push_back({w.re, pr[i].re});
  }
  if (with_imag)
    for (int i = 0; i < 4; ++i) {
      CJet<S, 3> w = cmul(rl, psi_t[i]);
      out.push_back({w.im, pr[i].im});
    }
  return out;
}

template <class S>
void velocity_from_psi(const Jet<S, 3>& psi, std::array<S, kChannels>& u1, std::array<S, kChannels>& u2) {
  u1 = {psi.deriv(0, 1), psi.deriv(1, 1), psi.deriv(0, 2), psi.deriv(2, 1), psi.deriv(1, 2), psi.deriv(0, 3)};
  u2 = {-psi.deriv(1, 0), -psi.deriv(2, 0), -psi.deriv(1, 1), -psi.deriv(3, 0), -psi.deriv(2, 1), -psi.deriv(1, 2)};
}

template <class S, int K>
void bundle_of(const Jet<S, K>& j, std::array<S, kChannels>& out) {
  out[kV] = j.deriv(0, 0);
  out[kX] = j.deriv(1, 0);
  out[kY] = j.deriv(0, 1);
  out[kXX] = j.deriv(2, 0);
  out[kXY] = j.deriv(1, 1);
  out[kYY] = j.deriv(0, 2);
}

// Bundles of every column/component of a term at one global point.
// Result index: [column][component][channel].
template <class S>
std::vector<std::vector<std::array<S, kChannels>>> eval_term_point(Family fam, const Corner& c, double x, double y,
                                                                   const S& xi, const S& zeta, bool with_imag,
                                                                   const std::optional<Cutoff>& cut) {
  using Arr = std::array<S, kChannels>;
  std::vector<std::vector<Arr>> out;
  const double half = 0.5 * c.alpha;
  if (fam == Family::PoissonCorner) {
    auto pj = polar_jet<2>(x, y, c.vertex.x(), c.vertex.y(), c.phi + half);
    pj.theta.c[0] += half;
    using J = Jet<S, 2>;
    J v = exp(J::promote(pj.logr) * xi) * sin(J::promote(pj.theta) * xi);
    if (cut) v = v * cutoff_jet<S, 2>(pj.logr, *cut);
    Arr b;
    bundle_of(v, b);
    out.push_back({b});
    return out;
  }
  auto pj = polar_jet<3>(x, y, c.vertex.x(), c.vertex.y(), c.phi + half);
  auto cols = stokes_columns<S>(fam, pj.logr, pj.theta, half, xi, zeta, with_imag);
  std::optional<Jet<S, 3>> chi;
  if (cut) chi = cutoff_jet<S, 3>(pj.logr, *cut);
  for (auto& col : cols) {
    Jet<S, 3> psi = col[0], p = col[1];
    if (chi) { psi = psi * *chi; p = p * *chi; }
    Arr u1, u2, pb;
    velocity_from_psi(psi, u1, u2);
    bundle_of(p, pb);
    out.push_back({u1, u2, pb});
  }
  return out;
}

}  // namespace detail

// Node traces of one term. value[col][comp] is a Bundle; dxi/dzeta hold
// μ-derivatives when requested.
struct TermTraces {
  int ncols = 0, ncomp = 0;
  std::vector<std::vector<Bundle>> value, dxi, dzeta;
};

inline TermTraces eval_term(const KnowledgeTerm& t, const Corner& c, const Vec& x, const Vec& y,
                            const ChannelMask& mask = kAllChannels, bool mu_derivs = false) {
  const int N = static_cast<int>(x.size());
  TermTraces tr;
  tr.ncols = column_count(t);
  tr.ncomp = component_count(t.family);
  const bool with_imag = tr.ncols == 8;
  auto alloc = [&](std::vector<std::vector<Bundle>>& v) {
    v.assign(tr.ncols, std::vector<Bundle>(tr.ncomp));
    for (auto& col : v)
      for (auto& b : col)
        for (int ch = 0; ch < kChannels; ++ch)
          if (mask[ch]) b[ch] = Vec::Zero(N);
  };
  alloc(tr.value);
  if (mu_derivs) { alloc(tr.dxi); alloc(tr.dzeta); }
  parallel_for(N, [&](int i0, int i1) {
    for (int i = i0; i < i1; ++i) {
      if ((Point(x[i], y[i]) - c.vertex).norm() < 1e-14) continue;  // excluded vertex: all traces 0
      if (mu_derivs) {
        auto xi = Dual<2>::variable(t.mu.real(), 0), ze = Dual<2>::variable(t.mu.imag(), 1);
        auto r = detail::eval_term_point<Dual<2>>(t.family, c, x[i], y[i], xi, ze, with_imag, t.cutoff);
        for (int k = 0; k < tr.ncols; ++k)
          for (int m = 0; m < tr.ncomp; ++m)
            for (int ch = 0; ch < kChannels; ++ch) {
              if (!mask[ch]) continue;
              tr.value[k][m][ch][i] = r[k][m][ch].v;
              tr.dxi[k][m][ch][i] = r[k][m][ch].d[0];
              tr.dzeta[k][m][ch][i] = r[k][m][ch].d[1];
            }
      } else {
        auto r = detail::eval_term_point<double>(t.family, c, x[i], y[i], t.mu.real(), t.mu.imag(), with_imag, t.cutoff);
        for (int k = 0; k < tr.ncols; ++k)
          for (int m = 0; m < tr.ncomp; ++m)
            for (int ch = 0; ch < kChannels; ++ch)
              if (mask[ch]) tr.value[k][m][ch][i] = r[k][m][ch];
      }
    }
  }, 16);
  return tr;
}

// ---- pointwise evaluators in a corner frame with vertex at the origin, θ = 0 on the x-axis

inline Corner origin_corner(double alpha) { return Corner{Point(0, 0), alpha, 0.0, "local"}; }

// r^μ sin(μθ); θ in (0, 2π). At r = 0 returns value 0 and excluded = true.
inline PointBundle poisson_singular(double r, double theta, double mu, bool* excluded = nullptr) {
  if (excluded) *excluded = r == 0.0;
  if (r == 0.0) return {0, 0, 0, 0, 0, 0};
  // corner with bisector through θ keeps the branch continuous at the point
  Corner c = origin_corner(2.0 * theta);
  auto r3 = detail::eval_term_point<double>(Family::PoissonCorner, c, r * std::cos(theta), r * std::sin(theta), mu, 0.0,
                                            false, std::nullopt);
  return r3[0][0];
}

// Ψ_λ(θ) = cos(λa)cos((λ−2)θ) − cos((λ−2)a)cos(λθ) and dΨ/dθ; a is the half angle.
inline std::pair<std::complex<double>, std::complex<double>> streamfunction_noslip(double theta, std::complex<double> lam,
                                                                                   double a) {
  const auto psi = std::cos(lam * a) * std::cos((lam - 2.0) * theta) - std::cos((lam - 2.0) * a) * std::cos(lam * theta);
  const auto dpsi = -(lam - 2.0) * std::cos(lam * a) * std::sin((lam - 2.0) * theta) +
                    lam * std::cos((lam - 2.0) * a) * std::sin(lam * theta);
  return {psi, dpsi};
}

struct StokesPoint {
  PointBundle u1, u2, p;
};

inline std::vector<StokesPoint> stokes_eval(Family fam, double r, double theta, std::complex<double> mu, double alpha) {
  std::vector<StokesPoint> out;
  if (r == 0.0) return out;
  Corner c = origin_corner(alpha);
  const bool with_imag = fam == Family::StokesDirichlet4 && mu.imag() != 0.0;
  auto cols = detail::eval_term_point<double>(fam, c, r * std::cos(theta), r * std::sin(theta), mu.real(), mu.imag(),
                                              with_imag, std::nullopt);
  for (auto& col : cols) out.push_back({col[0], col[1], col[2]});
  return out;
}

// θ ∈ (0, α) in the corner frame, walls at θ = 0 and θ = α.
inline StokesPoint stokes_noslip_eval(double r, double theta, double lam, double alpha) {
  return stokes_eval(Family::StokesNoslip, r, theta, {lam, 0.0}, alpha).at(0);
}
inline StokesPoint stokes_moffatt_eval(double r, double theta, double xi, double zeta, double alpha) {
  return stokes_eval(Family::StokesMoffatt, r, theta, {xi, zeta}, alpha).at(0);
}
inline std::vector<StokesPoint> stokes_dirichlet_terms(double r, double theta, std::complex<double> mu, double alpha) {
  return stokes_eval(Family::StokesDirichlet4, r, theta, mu, alpha);
}

}  // namespace xgnn
