#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "xgnn/forms.hpp"
#include "xgnn/knowledge.hpp"
#include "xgnn/pencil.hpp"
#include "xgnn/quadrature.hpp"
#include "xgnn/solver.hpp"

namespace xgnn {

struct ErrorTable {
  double l2 = 0.0, h1 = 0.0, h2 = 0.0, energy = 0.0;
};

// Errors of u_i against the exact solution. Norms use `rule` when given,
// otherwise the training interior rule; the energy error always uses the training rules.
inline ErrorTable error_table(const Subspace& S, const Setup& s, const QuadRule* rule = nullptr) {
  if (!s.has_exact) throw std::invalid_argument("error_table: no exact solution");
  ErrorTable t;
  t.energy = (s.r_exact - S.residual).norm();
  ErrorNorms n;
  if (rule) {
    auto u = S.eval(s.domain, rule->x, rule->y);
    auto ex = sample(s.data.exact, s.ncomp(), rule->x, rule->y);
    n = bundle_norms(u, &ex, s.error_comps(), rule->w);
  } else {
    n = bundle_norms(S.interior, &s.exact_in, s.error_comps(), s.q.w);
  }
  t.l2 = n.l2;
  t.h1 = n.h1;
  t.h2 = n.h2;
  return t;
}

// Sobolev norms of a pointwise field on a rule.
inline ErrorNorms field_norms(const ExactFn& f, int ncomp, const QuadRule& rule) {
  auto b = sample(f, ncomp, rule.x, rule.y);
  return bundle_norms(b, nullptr, ncomp, rule.w);
}

namespace detail {

template <class F>
double fd1(const F& f, double h) {
  return (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h);
}
template <class F>
double fd2(const F& f, double h) {
  return (-f(2.0 * h) + 16.0 * f(h) - 30.0 * f(0.0) + 16.0 * f(-h) - f(-2.0 * h)) / (12.0 * h * h);
}

}  // namespace detail

struct ProbeResult {
  double momentum = 0.0;        // max |−Δu + ∇p − f| relative to |u_xx| + |u_yy| + |∇p|
  double divergence = 0.0;      // max |div u − g| relative to |∇u|
  double momentum_abs = 0.0;
  double momentum_x_abs = 0.0;
  double divergence_abs = 0.0;
};

using StokesValueFn = std::function<std::array<double, 3>(double, double)>;

// Fourth-order central differences of the field values only.
inline ProbeResult pde_residual_probe(const StokesValueFn& field, const std::vector<Point>& pts, double h,
                                      const SourceFn& source = {}) {
  ProbeResult out;
  for (const Point& p : pts) {
    const double x = p.x(), y = p.y();
    auto comp = [&](int k, double dx, double dy) { return field(x + dx, y + dy)[k]; };
    double lap[2], lap_abs[2], grad_p[2], du[2][2];
    for (int k = 0; k < 2; ++k) {
      const double uxx = detail::fd2([&](double t) { return comp(k, t, 0); }, h);
      const double uyy = detail::fd2([&](double t) { return comp(k, 0, t); }, h);
      lap[k] = uxx + uyy;
      lap_abs[k] = std::abs(uxx) + std::abs(uyy);
      du[k][0] = detail::fd1([&](double t) { return comp(k, t, 0); }, h);
      du[k][1] = detail::fd1([&](double t) { return comp(k, 0, t); }, h);
    }
    grad_p[0] = detail::fd1([&](double t) { return comp(2, t, 0); }, h);
    grad_p[1] = detail::fd1([&](double t) { return comp(2, 0, t); }, h);
    std::array<double, 5> f{};
    if (source) f = source(x, y);
    double scale = 0.0, worst = 0.0;
    for (int k = 0; k < 2; ++k) {
      const double res = -lap[k] + grad_p[k] - f[k];
      scale = std::max(scale, lap_abs[k] + std::abs(grad_p[k]));
      worst = std::max(worst, std::abs(res));
      if (k == 0) out.momentum_x_abs = std::max(out.momentum_x_abs, std::abs(res));
    }
    out.momentum_abs = std::max(out.momentum_abs, worst);
    out.momentum = std::max(out.momentum, worst / std::max(scale, 1e-300));
    const double div = du[0][0] + du[1][1] - f[2];
    const double gscale = std::abs(du[0][0]) + std::abs(du[0][1]) + std::abs(du[1][0]) + std::abs(du[1][1]);
    out.divergence_abs = std::max(out.divergence_abs, std::abs(div));
    out.divergence = std::max(out.divergence, std::abs(div) / std::max(gscale, 1e-300));
  }
  return out;
}

// Poisson: max |−Δu − f| / (|u_xx| + |u_yy|).
inline double poisson_residual_probe(const std::function<double(double, double)>& u, const std::vector<Point>& pts,
                                     double h, const SourceFn& source = {}) {
  double worst = 0.0;
  for (const Point& p : pts) {
    const double x = p.x(), y = p.y();
    const double uxx = detail::fd2([&](double t) { return u(x + t, y); }, h);
    const double uyy = detail::fd2([&](double t) { return u(x, y + t); }, h);
    const double f = source ? source(x, y)[0] : 0.0;
    worst = std::max(worst, std::abs(-uxx - uyy - f) / std::max(std::abs(uxx) + std::abs(uyy), 1e-300));
  }
  return worst;
}

// Central differences against an analytic gradient: max_k |fd_k − g_k| / max_k |g_k|.
inline double fd_check(const std::function<double(const Vec&)>& f, const Vec& x0, const Vec& analytic, double h = 1e-5,
                       Vec* fd_out = nullptr) {
  Vec fd(x0.size());
  Vec x = x0;
  for (int k = 0; k < x0.size(); ++k) {
    x[k] = x0[k] + h;
    const double fp = f(x);
    x[k] = x0[k] - h;
    const double fm = f(x);
    x[k] = x0[k];
    fd[k] = (fp - fm) / (2.0 * h);
  }
  if (fd_out) *fd_out = fd;
  const double scale = std::max(analytic.cwiseAbs().maxCoeff(), fd.cwiseAbs().maxCoeff());
  if (scale == 0.0) return 0.0;
  return (fd - analytic).cwiseAbs().maxCoeff() / scale;
}

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

namespace detail {

inline std::string fmt(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3e", v);
  return b;
}

inline double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Random points of a corner frame at the origin: r in [r0, r1], θ in the middle of (0, α).
inline std::vector<Point> corner_probe_points(double alpha, int n, double r0, double r1, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Point> pts;
  for (int k = 0; k < n; ++k) {
    const double r = uniform(rng, r0, r1), t = uniform(rng, 0.05 * alpha, 0.95 * alpha);
    pts.emplace_back(r * std::cos(t), r * std::sin(t));
  }
  return pts;
}

inline Polar origin_polar(double x, double y) { return {std::hypot(x, y), wrap_angle(std::atan2(y, x))}; }

}  // namespace detail

inline CheckResult validate_pencil() {
  const auto t0 = std::chrono::steady_clock::now();
  CheckResult c{"pencil"};
  const double l = laplace_exponents(1.5 * kPi, 1)[0].xi;
  const double a = biharmonic_exponents(kPi + std::atan(3.0), 1, false)[0].xi;
  const auto b = biharmonic_exponents(2.0 * std::atan(1.0 / 3.0), 1, true)[0];
  c.seconds = detail::elapsed(t0);
  const bool ok_l = l == 2.0 / 3.0;
  const bool ok_a = std::abs(a - 1.58223) <= 1e-4;
  const bool ok_b = std::abs(b.xi - 7.56813) <= 1e-3 && std::abs(b.zeta - 3.37941) <= 1e-3;
  c.pass = ok_l && ok_a && ok_b && c.seconds < 5.0;
  c.detail = "laplace(3pi/2) = " + detail::fmt(l) + ", biharmonic(pi+atan3) = " + detail::fmt(a) +
             ", biharmonic(2atan(1/3)) = " + detail::fmt(b.xi) + " + " + detail::fmt(b.zeta) + "i";
  return c;
}

// FD probes of every Stokes corner eigenfunction at pencil roots.
inline CheckResult validate_eigenfunctions(int npts = 200) {
  const auto t0 = std::chrono::steady_clock::now();
  CheckResult c{"eigenfunctions"};
  const double h = 1e-3;
  double mom = 0.0, div = 0.0, wall = 0.0;
  struct Case {
    Family fam;
    double alpha;
    std::complex<double> mu;
    int col;
  };
  std::vector<Case> cases;
  for (double alpha : {kPi + std::atan(3.0), 1.5 * kPi}) {
    const auto roots = biharmonic_exponents(alpha, 2, false);
    // the symmetric streamfunction is a wall eigenfunction only at the leading root
    cases.push_back({Family::StokesNoslip, alpha, roots[0].lambda(), 0});
    for (const auto& r : roots)
      for (int k = 0; k < 4; ++k) cases.push_back({Family::StokesDirichlet4, alpha, r.lambda(), k});
  }
  for (double alpha : {2.0 * std::atan(1.0 / 3.0), 0.5 * kPi}) {
    const auto r = biharmonic_exponents(alpha, 1, true)[0];
    cases.push_back({Family::StokesMoffatt, alpha, r.lambda(), 0});
    for (int k = 0; k < 8; ++k) cases.push_back({Family::StokesDirichlet4, alpha, r.lambda(), k});
  }
  std::uint64_t seed = 11;
  for (const auto& cs : cases) {
    auto field = [&](double x, double y) {
      const Polar p = detail::origin_polar(x, y);
      auto cols = stokes_eval(cs.fam, p.r, p.theta, cs.mu, cs.alpha);
      const auto& s = cols.at(cs.col);
      return std::array<double, 3>{s.u1[kV], s.u2[kV], s.p[kV]};
    };
    auto pts = detail::corner_probe_points(cs.alpha, npts, 0.1, 1.0, seed++);
    ProbeResult pr = pde_residual_probe(field, pts, h);
    mom = std::max(mom, pr.momentum);
    for (const Point& q : pts) {
      const Polar p = detail::origin_polar(q.x(), q.y());
      const auto s = stokes_eval(cs.fam, p.r, p.theta, cs.mu, cs.alpha).at(cs.col);
      const double g = std::abs(s.u1[kX]) + std::abs(s.u1[kY]) + std::abs(s.u2[kX]) + std::abs(s.u2[kY]);
      div = std::max(div, std::abs(s.u1[kX] + s.u2[kY]) / std::max(g, 1e-300));
    }
    if (cs.fam != Family::StokesDirichlet4) {
      for (int k = 1; k <= 20; ++k) {
        const double r = 0.05 * k;
        for (double th : {0.0, cs.alpha}) {
          auto s = stokes_eval(cs.fam, r, th, cs.mu, cs.alpha).at(0);
          auto s_in = stokes_eval(cs.fam, r, 0.5 * cs.alpha, cs.mu, cs.alpha).at(0);
          const double scale = std::max({std::abs(s_in.u1[kV]), std::abs(s_in.u2[kV]), 1e-300});
          wall = std::max(wall, std::max(std::abs(s.u1[kV]), std::abs(s.u2[kV])) / std::max(scale, 1.0));
        }
      }
    }
  }
  c.seconds = detail::elapsed(t0);
  c.pass = mom <= 1e-6 && div <= 1e-8 && wall <= 1e-8 && c.seconds < 30.0;
  c.detail = std::to_string(cases.size()) + " fields: momentum " + detail::fmt(mom) + ", divergence " + detail::fmt(div) +
             ", wall velocity " + detail::fmt(wall);
  return c;
}

namespace detail {

// Small problem for gradient checks; `kind` 0 Poisson L-shape, 1 Stokes sector,
// 2 Stokes wedge, 3 Stokes channel with fixed dirichlet columns.
struct GradientCase {
  Setup setup;
  TrainConfig cfg;
  std::vector<KnowledgeTerm> trainable, fixed;
};

inline GradientCase gradient_case(int kind, std::mt19937_64& rng) {
  GradientCase g;
  FormSpec spec;
  spec.beta = {uniform(rng, 0.0, 2.0)};
  spec.delta = uniform(rng, 0.0, 1.0) < 0.5 ? 1.0 : 1e3;
  spec.sb = uniform(rng, 0.0, 1.0) < 0.5 ? 0 : 1;
  g.cfg.width0 = 2 + static_cast<int>(uniform(rng, 0.0, 4.0));
  g.cfg.depth = uniform(rng, 0.0, 1.0) < 0.25 ? 2 : 1;
  g.cfg.scale0 = uniform(rng, 0.8, 1.5);
  Domain d;
  ProblemData data;
  if (kind == 0) {
    d = make_preset_domain("lshape");
    spec.problem = Problem::Poisson;
    data = manufactured(Problem::Poisson, [](double x, double y) {
      auto pj = polar_jet<2>(x, y, 0.0, 0.0, 0.25 * kPi);
      Jet<double, 2> v = exp(pj.logr * (2.0 / 3.0)) * sin((pj.theta + 0.75 * kPi) * (2.0 / 3.0));
      PointBundle b;
      bundle_of(v, b);
      b[kV] += x * x * y;
      b[kX] += 2 * x * y;
      b[kY] += x * x;
      b[kXX] += 2 * y;
      b[kXY] += 2 * x;
      return std::vector<PointBundle>{b};
    });
    KnowledgeTerm t;
    t.family = Family::PoissonCorner;
    t.mu = {uniform(rng, 0.4, 1.5), 0.0};
    t.trainable = true;
    g.trainable.push_back(t);
    KnowledgeTerm f = t;
    f.mu = {4.0 / 3.0, 0.0};
    f.trainable = false;
    f.id = 1;
    g.fixed.push_back(f);
  } else {
    spec.problem = Problem::Stokes;
    d = make_preset_domain(kind == 1 ? "sector" : kind == 2 ? "wedge" : "channel_cavity");
    data.source = [](double x, double y) { return std::array<double, 5>{std::sin(x), y, 0.3 * x, 0.3, 0.0}; };
    data.boundary = [](double x, double y, int) {
      return std::array<double, 6>{x * y, y, x, std::cos(x), -std::sin(x), 0.0};
    };
    KnowledgeTerm t;
    t.trainable = true;
    if (kind == 1) {
      t.family = Family::StokesNoslip;
      t.mu = {uniform(rng, 1.3, 1.9), 0.0};
      t.cutoff = Cutoff{0.5, 0.9};
      g.trainable.push_back(t);
    } else if (kind == 2) {
      t.family = Family::StokesMoffatt;
      t.mu = {uniform(rng, 7.0, 8.0), uniform(rng, 3.0, 4.0)};
      t.cutoff = Cutoff{2.0, 2.8};
      g.trainable.push_back(t);
    } else {
      for (int k = 0; k < 3; ++k) {
        KnowledgeTerm f;
        f.family = Family::StokesDirichlet4;
        f.corner = k;
        f.mu = k < 2 ? std::complex<double>(1.5822387, 0.0) : std::complex<double>(7.5681417, 3.3794309);
        f.cutoff = k < 2 ? Cutoff{0.5, 1.0} : Cutoff{2.75, 3.0};
        f.id = k;
        g.fixed.push_back(f);
      }
    }
  }
  const int n = 5;
  g.setup = make_setup(d, spec, data, interior_rule(d, n, n), boundary_rule(d, 4));
  return g;
}

}  // namespace detail

// Analytic ∇_{W,b,μ} and ∇_c of the normalized objective against central differences.
inline CheckResult validate_gradients(int configs = 50, double tol = 1e-5, std::uint64_t seed = 2024) {
  const auto t0 = std::chrono::steady_clock::now();
  CheckResult c{"gradients"};
  std::mt19937_64 rng(seed);
  double worst = 0.0, worst_c = 0.0;
  for (int k = 0; k < configs; ++k) {
    auto g = detail::gradient_case(k % 4, rng);
    std::mt19937_64 init(seed + 7 * k);
    BasisTrainer tr(g.setup, g.cfg, 1, g.setup.data_vec, g.trainable, g.fixed, init);
    Vec coef(tr.column_total());
    for (int j = 0; j < coef.size(); ++j) coef[j] = uniform_pm1(rng);
    const Vec p0 = tr.params();
    Objective o = tr.evaluate_with(coef, true);
    auto f = [&](const Vec& p) {
      tr.set_params(p);
      return tr.evaluate_with(coef, false).J;
    };
    worst = std::max(worst, fd_check(f, p0, o.grad, 1e-5));
    tr.set_params(p0);
    auto fc = [&](const Vec& cc) { return tr.evaluate_with(cc, false).J; };
    worst_c = std::max(worst_c, fd_check(fc, coef, o.grad_c, 1e-5));
  }
  c.seconds = detail::elapsed(t0);
  c.pass = worst <= tol && worst_c <= tol && c.seconds < 120.0;
  c.detail = std::to_string(configs) + " configurations: W,b,mu deviation " + detail::fmt(worst) + ", c deviation " +
             detail::fmt(worst_c);
  return c;
}

inline CheckResult validate_quadrature() {
  const auto t0 = std::chrono::steady_clock::now();
  CheckResult c{"quadrature"};
  double worst = 0.0;
  auto [x, w] = gauss_legendre_1d(8, -1.0, 1.0);
  for (int p = 0; p <= 15; ++p) {
    const double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
    worst = std::max(worst, std::abs((w.array() * x.array().pow(p)).sum() - exact));
  }
  const Domain circle = make_preset_domain("unit_circle");
  const BoundaryRule bc = boundary_rule(circle, 256, BoundaryScheme::Riemann);
  worst = std::max(worst, std::abs(bc.w.sum() - 2 * kPi));
  const QuadRule qc = interior_rule(circle, 32, 32);
  worst = std::max(worst, std::abs((qc.w.array() * qc.y.array().square()).sum() - kPi / 4));
  const Domain L = make_preset_domain("lshape");
  const QuadRule ql = interior_rule(L, 8, 8);
  worst = std::max(worst, std::abs(ql.w.sum() - 3.0));
  worst = std::max(worst, std::abs((ql.w.array() * (ql.x.array() * ql.y.array()).square()).sum() - 1.0 / 3.0));
  const Domain ch = make_preset_domain("channel_cavity");
  const double masked = interior_rule(ch, 128, 128).w.sum();
  const bool ok_mask = std::abs(masked - 11.0) < 2e-2;
  c.seconds = detail::elapsed(t0);
  c.pass = worst < 1e-12 && ok_mask;
  c.detail = "exact-rule deviation " + detail::fmt(worst) + ", masked channel area " + detail::fmt(masked);
  return c;
}

}  // namespace xgnn
