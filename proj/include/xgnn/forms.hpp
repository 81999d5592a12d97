#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "xgnn/fields.hpp"
#include "xgnn/geometry.hpp"
#include "xgnn/quadrature.hpp"

namespace xgnn {

enum class Problem { Poisson, Stokes };

struct FormSpec {
  Problem problem = Problem::Poisson;
  std::vector<double> beta;  // per domain corner; a single entry applies to all corners
  double delta = 1e3;
  int sb = 1;  // boundary norm order surrogate (0: L², 1: H¹ with weighted tangential derivative)

  int components() const { return problem == Problem::Poisson ? 1 : 3; }
};

// Interior data (f1, f2, g, ∂x g, ∂y g); Poisson reads f1 only.
using SourceFn = std::function<std::array<double, 5>(double, double)>;
// Boundary data per component: (u1, ∂x u1, ∂y u1, u2, ∂x u2, ∂y u2); Poisson reads the first three.
using BoundaryFn = std::function<std::array<double, 6>(double, double, int edge)>;
// Exact solution bundles per component.
using ExactFn = std::function<std::vector<PointBundle>(double, double)>;

struct ProblemData {
  SourceFn source;
  BoundaryFn boundary;
  ExactFn exact;  // empty when unknown
};

// Π_i r_i^{β_i}
inline Vec corner_weight(const Domain& d, const std::vector<double>& beta, const Vec& x, const Vec& y) {
  Vec rho = Vec::Ones(x.size());
  if (beta.empty()) return rho;
  for (std::size_t c = 0; c < d.corners.size(); ++c) {
    const double b = beta.size() == 1 ? beta[0] : beta.at(c);
    if (b == 0.0) continue;
    const Point v = d.corners[c].vertex;
    for (int i = 0; i < x.size(); ++i) {
      const double r = std::hypot(x[i] - v.x(), y[i] - v.y());
      rho[i] *= std::pow(r, b);
    }
  }
  return rho;
}

// One block of the scaled residual vector: Σ_terms coef ⊙ bundle[comp][ch] at
// interior or boundary nodes. `data` is the matching block of the data residual.
struct Term {
  int comp = 0;
  int ch = kV;
  Vec coef;
};

struct Group {
  std::string name;
  bool boundary = false;
  std::vector<Term> terms;
  Vec data;
};

// a_LS(u, v) = R(u)·R(v), F_LS(v) = data·R(v).
struct ResidualMap {
  std::vector<Group> groups;
  int n_int = 0, n_bnd = 0, ncomp = 1;

  int size() const {
    int s = 0;
    for (const auto& g : groups) s += g.boundary ? n_bnd : n_int;
    return s;
  }
  Vec data() const {
    Vec d(size());
    int at = 0;
    for (const auto& g : groups) { d.segment(at, g.data.size()) = g.data; at += static_cast<int>(g.data.size()); }
    return d;
  }
  // channels read from component `comp` at interior (boundary=false) or boundary nodes
  ChannelMask mask(int comp, bool boundary) const {
    ChannelMask m{};
    for (const auto& g : groups)
      if (g.boundary == boundary)
        for (const auto& t : g.terms)
          if (t.comp == comp) m[t.ch] = true;
    return m;
  }
  ChannelMask mask_any(bool boundary) const {
    ChannelMask m{};
    for (int c = 0; c < ncomp; ++c) {
      auto mc = mask(c, boundary);
      for (int ch = 0; ch < kChannels; ++ch) m[ch] = m[ch] || mc[ch];
    }
    return m;
  }

  // residual of a field given per-component bundles at interior and boundary nodes
  Vec apply(const std::vector<Bundle>& in, const std::vector<Bundle>& bd) const {
    Vec r = Vec::Zero(size());
    int at = 0;
    for (const auto& g : groups) {
      const int n = g.boundary ? n_bnd : n_int;
      const auto& src = g.boundary ? bd : in;
      for (const auto& t : g.terms) r.segment(at, n).array() += t.coef.array() * src[t.comp][t.ch].array();
      at += n;
    }
    return r;
  }

  // residual columns of per-unit traces belonging to component `comp`
  Mat apply_units(int comp, const UnitBundle& in, const UnitBundle& bd, int ncols) const {
    Mat R = Mat::Zero(size(), ncols);
    int at = 0;
    for (const auto& g : groups) {
      const int n = g.boundary ? n_bnd : n_int;
      const auto& src = g.boundary ? bd : in;
      for (const auto& t : g.terms)
        if (t.comp == comp) R.middleRows(at, n).noalias() += t.coef.asDiagonal() * src[t.ch];
      at += n;
    }
    return R;
  }

  // node adjoints: out[comp][ch] = Σ_terms coef ⊙ g_block
  std::vector<Adjoint> adjoint(const Vec& g, bool boundary) const {
    std::vector<Adjoint> out(ncomp);
    const int nn = boundary ? n_bnd : n_int;
    int at = 0;
    for (const auto& gr : groups) {
      const int n = gr.boundary ? n_bnd : n_int;
      if (gr.boundary == boundary)
        for (const auto& t : gr.terms) {
          Vec& a = out[t.comp][t.ch];
          if (a.size() != nn) a = Vec::Zero(nn);
          a.array() += t.coef.array() * g.segment(at, n).array();
        }
      at += n;
    }
    return out;
  }
};

inline ResidualMap build_residual_map(const FormSpec& spec, const Domain& d, const QuadRule& q, const BoundaryRule& b,
                                      const ProblemData& data) {
  ResidualMap m;
  m.n_int = q.size();
  m.n_bnd = b.size();
  m.ncomp = spec.components();
  const Vec rho_i = corner_weight(d, spec.beta, q.x, q.y);
  const Vec rho_b = corner_weight(d, spec.beta, b.x, b.y);
  const Vec sw = q.w.array().sqrt();
  const Vec a = (sw.array() * rho_i.array()).matrix();
  const Vec sb = (spec.delta * b.w.array()).sqrt();
  const Vec sbt = (sb.array() * rho_b.array()).matrix();

  std::vector<std::array<double, 5>> src(m.n_int);
  for (int i = 0; i < m.n_int; ++i) src[i] = data.source ? data.source(q.x[i], q.y[i]) : std::array<double, 5>{};
  std::vector<std::array<double, 6>> bc(m.n_bnd);
  for (int i = 0; i < m.n_bnd; ++i) bc[i] = data.boundary ? data.boundary(b.x[i], b.y[i], b.edge[i]) : std::array<double, 6>{};
  auto col = [](const auto& v, int k, int n) {
    Vec out(n);
    for (int i = 0; i < n; ++i) out[i] = v[i][k];
    return out;
  };
  const Vec tx = b.tx, ty = b.ty;

  auto bc_groups = [&](int comp, int off, const std::string& name) {
    Group g{name, true, {{comp, kV, sb}}, (sb.array() * col(bc, off, m.n_bnd).array()).matrix()};
    m.groups.push_back(g);
    if (spec.sb == 1) {
      Vec dt = (tx.array() * col(bc, off + 1, m.n_bnd).array() + ty.array() * col(bc, off + 2, m.n_bnd).array()).matrix();
      Group gt{name + "_t", true,
               {{comp, kX, (sbt.array() * tx.array()).matrix()}, {comp, kY, (sbt.array() * ty.array()).matrix()}},
               (sbt.array() * dt.array()).matrix()};
      m.groups.push_back(gt);
    }
  };

  if (spec.problem == Problem::Poisson) {
    m.groups.push_back({"pde", false, {{0, kXX, -a}, {0, kYY, -a}}, (a.array() * col(src, 0, m.n_int).array()).matrix()});
    bc_groups(0, 0, "bc");
    return m;
  }
  m.groups.push_back({"mom1", false, {{0, kXX, -a}, {0, kYY, -a}, {2, kX, a}}, (a.array() * col(src, 0, m.n_int).array()).matrix()});
  m.groups.push_back({"mom2", false, {{1, kXX, -a}, {1, kYY, -a}, {2, kY, a}}, (a.array() * col(src, 1, m.n_int).array()).matrix()});
  m.groups.push_back({"div", false, {{0, kX, sw}, {1, kY, sw}}, (sw.array() * col(src, 2, m.n_int).array()).matrix()});
  m.groups.push_back({"div_x", false, {{0, kXX, a}, {1, kXY, a}}, (a.array() * col(src, 3, m.n_int).array()).matrix()});
  m.groups.push_back({"div_y", false, {{0, kXY, a}, {1, kYY, a}}, (a.array() * col(src, 4, m.n_int).array()).matrix()});
  bc_groups(0, 0, "bc1");
  bc_groups(1, 3, "bc2");
  return m;
}

// Bundles of a pointwise field (e.g. an exact solution) at nodes.
inline std::vector<Bundle> sample(const ExactFn& f, int ncomp, const Vec& x, const Vec& y) {
  std::vector<Bundle> out(ncomp);
  for (auto& b : out)
    for (auto& v : b) v = Vec::Zero(x.size());
  for (int i = 0; i < x.size(); ++i) {
    auto pb = f(x[i], y[i]);
    for (int c = 0; c < ncomp; ++c)
      for (int ch = 0; ch < kChannels; ++ch) out[c][ch][i] = pb[c][ch];
  }
  return out;
}

inline double als_eval(const Vec& Ru, const Vec& Rv) { return Ru.dot(Rv); }
inline double fls_eval(const ResidualMap& m, const Vec& Rv) { return m.data().dot(Rv); }

// (u, v)_{β} for s = 0 and the weighted H¹ pattern for s = 1:
// ∫ uv + ∫ ρ² ∇u·∇v with ρ = Π r_i^{β_i}.
inline double weighted_inner(const Bundle& u, const Bundle& v, int s, const Vec& rho, const QuadRule& q) {
  if (u[kV].size() != q.w.size() || v[kV].size() != q.w.size()) throw std::invalid_argument("weighted_inner: rule mismatch");
  const Eigen::ArrayXd r2 = rho.array().square();
  if (s == 0) return (q.w.array() * r2 * u[kV].array() * v[kV].array()).sum();
  return (q.w.array() * u[kV].array() * v[kV].array()).sum() +
         (q.w.array() * r2 * (u[kX].array() * v[kX].array() + u[kY].array() * v[kY].array())).sum();
}

// ∫_Ω g dx + ∫_{∂Ω} u_D·n ds
inline double compatibility_defect(const ProblemData& data, const QuadRule& q, const BoundaryRule& b) {
  double s = 0.0;
  for (int i = 0; i < q.size(); ++i)
    if (data.source) s += q.w[i] * data.source(q.x[i], q.y[i])[2];
  for (int i = 0; i < b.size(); ++i) {
    if (!data.boundary) break;
    auto u = data.boundary(b.x[i], b.y[i], b.edge[i]);
    s += b.w[i] * (u[0] * b.nx[i] + u[3] * b.ny[i]);
  }
  return s;
}

// Data derived from an exact solution: f = −Δu (Poisson) or f = −Δu + ∇p, g = div u (Stokes).
inline ProblemData manufactured(Problem p, ExactFn exact) {
  ProblemData d;
  d.exact = exact;
  if (p == Problem::Poisson) {
    d.source = [exact](double x, double y) {
      auto b = exact(x, y)[0];
      return std::array<double, 5>{-(b[kXX] + b[kYY]), 0, 0, 0, 0};
    };
    d.boundary = [exact](double x, double y, int) {
      auto b = exact(x, y)[0];
      return std::array<double, 6>{b[kV], b[kX], b[kY], 0, 0, 0};
    };
  } else {
    d.source = [exact](double x, double y) {
      auto b = exact(x, y);
      return std::array<double, 5>{-(b[0][kXX] + b[0][kYY]) + b[2][kX], -(b[1][kXX] + b[1][kYY]) + b[2][kY],
                                   b[0][kX] + b[1][kY], b[0][kXX] + b[1][kXY], b[0][kXY] + b[1][kYY]};
    };
    d.boundary = [exact](double x, double y, int) {
      auto b = exact(x, y);
      return std::array<double, 6>{b[0][kV], b[0][kX], b[0][kY], b[1][kV], b[1][kX], b[1][kY]};
    };
  }
  return d;
}

}  // namespace xgnn
