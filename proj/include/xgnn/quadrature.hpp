#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "xgnn/errors.hpp"
#include "xgnn/geometry.hpp"

namespace xgnn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct QuadRule {
  Vec x, y, w;
  std::vector<int> region;
  std::string tag = "interior";
  int size() const { return static_cast<int>(w.size()); }
};

struct BoundaryRule {
  Vec x, y, w;
  Vec tx, ty, nx, ny;
  std::vector<int> edge;
  std::vector<std::string> bc;
  int size() const { return static_cast<int>(w.size()); }
};

// Newton iteration on P_n from the Chebyshev-like initial guesses.
inline std::pair<Vec, Vec> gauss_legendre_1d(int n, double a, double b) {
  if (n < 1) throw ConfigError("gauss_legendre_1d: node count must be >= 1");
  if (!(a < b)) throw std::invalid_argument("gauss_legendre_1d: need a < b");
  Vec xs(n), ws(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
    }
    const double wt = 2.0 / ((1.0 - z * z) * dp * dp);
    xs[i] = -z;
    xs[n - 1 - i] = z;
    ws[i] = wt;
    ws[n - 1 - i] = wt;
  }
  if (n % 2 == 1) xs[n / 2] = 0.0;
  const double h = 0.5 * (b - a), m = 0.5 * (a + b);
  return {(m + h * xs.array()).matrix(), (h * ws.array()).matrix()};
}

// Composite Gauss rule with `levels` geometric refinements (ratio 1/2) toward
// one end of [a, b]; levels = 0 is the plain rule.
inline std::pair<Vec, Vec> graded_gauss_1d(int n, double a, double b, int levels, bool toward_a) {
  if (levels <= 0) return gauss_legendre_1d(n, a, b);
  std::vector<double> cuts{0.0};
  for (int k = levels; k >= 1; --k) cuts.push_back(std::ldexp(1.0, -k));
  cuts.push_back(1.0);
  Vec xs(n * (levels + 1)), ws(n * (levels + 1));
  int at = 0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    double s0 = cuts[k], s1 = cuts[k + 1];
    if (!toward_a) { const double t = 1.0 - s1; s1 = 1.0 - s0; s0 = t; }
    auto [xk, wk] = gauss_legendre_1d(n, a + s0 * (b - a), a + s1 * (b - a));
    xs.segment(at, n) = xk;
    ws.segment(at, n) = wk;
    at += n;
  }
  return {xs, ws};
}

namespace detail {

inline bool near(double a, double b) { return std::abs(a - b) < 1e-12; }

// grading direction toward a corner vertex lying on a rectangle side
inline int grade_dir(double lo, double hi, const Domain& d, bool x_axis) {
  for (const auto& c : d.corners) {
    const double v = x_axis ? c.vertex.x() : c.vertex.y();
    if (near(v, lo)) return -1;
    if (near(v, hi)) return 1;
  }
  return 0;
}

inline bool corner_touches(const Region& r, const Domain& d) {
  for (const auto& c : d.corners) {
    const double x = c.vertex.x(), y = c.vertex.y();
    if (x >= r.x0 - 1e-12 && x <= r.x1 + 1e-12 && y >= r.y0 - 1e-12 && y <= r.y1 + 1e-12) return true;
  }
  return false;
}

}  // namespace detail

// Union of tensor rules over the domain's sub-regions. Masked rectangles keep
// their exterior nodes with weight 0. `grading` > 0 refines geometrically
// toward corner vertices on region boundaries.
inline QuadRule interior_rule(const Domain& d, int nx, int ny, int grading = 0) {
  if (nx < 1 || ny < 1) throw ConfigError("interior_rule: node counts must be >= 1");
  std::vector<double> X, Y, W;
  std::vector<int> reg;
  for (std::size_t ri = 0; ri < d.regions.size(); ++ri) {
    const Region& r = d.regions[ri];
    if (r.kind == Region::Kind::Rect) {
      const bool g = grading > 0 && detail::corner_touches(r, d);
      const int gx = g ? detail::grade_dir(r.x0, r.x1, d, true) : 0;
      const int gy = g ? detail::grade_dir(r.y0, r.y1, d, false) : 0;
      auto [xs, wx] = graded_gauss_1d(nx, r.x0, r.x1, gx ? grading : 0, gx < 0);
      auto [ys, wy] = graded_gauss_1d(ny, r.y0, r.y1, gy ? grading : 0, gy < 0);
      for (int i = 0; i < xs.size(); ++i)
        for (int j = 0; j < ys.size(); ++j) {
          double wt = wx[i] * wy[j];
          if (r.masked && !d.inside(Point(xs[i], ys[j]))) wt = 0.0;
          X.push_back(xs[i]);
          Y.push_back(ys[j]);
          W.push_back(wt);
          reg.push_back(static_cast<int>(ri));
        }
    } else {
      bool at_corner = false;
      for (const auto& c : d.corners) at_corner |= (c.vertex - r.center).norm() < 1e-12;
      auto [rs, wr] = graded_gauss_1d(nx, r.r0, r.r1, (grading > 0 && at_corner) ? grading : 0, true);
      auto [ts, wt] = gauss_legendre_1d(ny, r.t0, r.t1);
      for (int i = 0; i < rs.size(); ++i)
        for (int j = 0; j < ts.size(); ++j) {
          X.push_back(r.center.x() + rs[i] * std::cos(ts[j]));
          Y.push_back(r.center.y() + rs[i] * std::sin(ts[j]));
          W.push_back(wr[i] * wt[j] * rs[i]);
          reg.push_back(static_cast<int>(ri));
        }
    }
  }
  QuadRule q;
  q.x = Eigen::Map<Vec>(X.data(), X.size());
  q.y = Eigen::Map<Vec>(Y.data(), Y.size());
  q.w = Eigen::Map<Vec>(W.data(), W.size());
  q.region = std::move(reg);
  return q;
}

// Drops zero-weight (masked) nodes.
inline QuadRule compact(const QuadRule& q) {
  std::vector<int> keep;
  for (int i = 0; i < q.size(); ++i)
    if (q.w[i] > 0.0) keep.push_back(i);
  QuadRule out;
  out.tag = q.tag;
  out.x.resize(keep.size());
  out.y.resize(keep.size());
  out.w.resize(keep.size());
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out.x[k] = q.x[keep[k]];
    out.y[k] = q.y[keep[k]];
    out.w[k] = q.w[keep[k]];
    out.region.push_back(q.region[keep[k]]);
  }
  return out;
}

enum class BoundaryScheme { Gauss, Riemann };

// Gauss-Legendre per edge, or a uniform rule (left endpoints on arcs, midpoints
// on segments so that no node sits on a vertex).
inline BoundaryRule boundary_rule(const Domain& d, int n, BoundaryScheme scheme = BoundaryScheme::Gauss) {
  if (n < 1) throw ConfigError("boundary_rule: node count must be >= 1");
  std::vector<int> counts(d.edges.size(), n);
  if (d.boundary_total) {
    const double per = d.perimeter();
    int used = 0;
    for (std::size_t e = 0; e < d.edges.size(); ++e) {
      counts[e] = std::max(1, static_cast<int>(std::lround(n * d.edges[e].length() / per)));
      used += counts[e];
    }
    counts[0] += n - used;
    if (counts[0] < 1) counts[0] = 1;
  }
  int total = 0;
  for (int c : counts) total += c;
  BoundaryRule b;
  b.x.resize(total); b.y.resize(total); b.w.resize(total);
  b.tx.resize(total); b.ty.resize(total); b.nx.resize(total); b.ny.resize(total);
  int at = 0;
  for (std::size_t e = 0; e < d.edges.size(); ++e) {
    const Edge& ed = d.edges[e];
    const int m = counts[e];
    Vec s, ws;
    if (scheme == BoundaryScheme::Gauss) {
      std::tie(s, ws) = gauss_legendre_1d(m, 0.0, 1.0);
    } else {
      s.resize(m);
      ws = Vec::Constant(m, 1.0 / m);
      const double off = ed.kind == Edge::Kind::Arc ? 0.0 : 0.5;
      for (int k = 0; k < m; ++k) s[k] = (k + off) / m;
    }
    const double len = ed.length();
    for (int k = 0; k < m; ++k, ++at) {
      const Point p = ed.at(s[k]), t = ed.tangent(s[k]), nn = ed.normal(s[k]);
      b.x[at] = p.x(); b.y[at] = p.y(); b.w[at] = ws[k] * len;
      b.tx[at] = t.x(); b.ty[at] = t.y(); b.nx[at] = nn.x(); b.ny[at] = nn.y();
      b.edge.push_back(static_cast<int>(e));
      b.bc.push_back(ed.bc);
    }
  }
  return b;
}

template <class Rule>
double integrate(const Vec& values, const Rule& rule) {
  if (values.size() != rule.w.size()) throw std::invalid_argument("integrate: length mismatch");
  return rule.w.dot(values);
}

}  // namespace xgnn
