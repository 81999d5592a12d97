#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "xgnn/errors.hpp"

namespace xgnn {

using Point = Eigen::Vector2d;
constexpr double kPi = std::numbers::pi;

struct Corner {
  Point vertex{0.0, 0.0};
  double alpha = kPi;  // interior angle
  double phi = 0.0;    // global direction of the θ = 0 edge
  std::string tag;
};

struct Edge {
  enum class Kind { Segment, Arc };
  Kind kind = Kind::Segment;
  Point a{0, 0}, b{0, 0};  // segment, traversed a -> b with Ω on the left
  Point center{0, 0};      // arc, counterclockwise from t0 to t1
  double radius = 0.0, t0 = 0.0, t1 = 0.0;
  std::string bc = "dirichlet";

  double length() const {
    return kind == Kind::Segment ? (b - a).norm() : radius * (t1 - t0);
  }
  // s in [0, 1] along the edge
  Point at(double s) const {
    if (kind == Kind::Segment) return a + s * (b - a);
    const double t = t0 + s * (t1 - t0);
    return center + radius * Point(std::cos(t), std::sin(t));
  }
  Point tangent(double s) const {
    if (kind == Kind::Segment) return (b - a).normalized();
    const double t = t0 + s * (t1 - t0);
    return Point(-std::sin(t), std::cos(t));
  }
  // outward for a counterclockwise boundary
  Point normal(double s) const {
    Point t = tangent(s);
    return Point(t.y(), -t.x());
  }
};

// Sub-region carrying a tensor rule: axis-aligned rectangle (optionally masked
// by the domain predicate) or a polar patch around `center`.
struct Region {
  enum class Kind { Rect, Polar };
  Kind kind = Kind::Rect;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  Point center{0, 0};
  double r0 = 0, r1 = 1, t0 = 0, t1 = 2 * kPi;
  bool masked = false;

  Point centroid() const {
    if (kind == Kind::Rect) return Point(0.5 * (x0 + x1), 0.5 * (y0 + y1));
    const double r = 0.5 * (r0 + r1), t = 0.5 * (t0 + t1);
    return center + r * Point(std::cos(t), std::sin(t));
  }
};

struct Domain {
  std::string name;
  std::vector<Point> vertices;
  std::vector<Edge> edges;
  std::vector<Corner> corners;
  std::vector<Region> regions;
  std::function<bool(const Point&)> inside;
  double area = 0.0;
  double diameter = 1.0;
  bool boundary_total = false;  // boundary_n counts nodes over all edges rather than per edge

  double perimeter() const {
    double p = 0.0;
    for (const auto& e : edges) p += e.length();
    return p;
  }
};

struct Polar {
  double r = 0.0;
  double theta = 0.0;
};

inline double wrap_angle(double t) {
  t = std::fmod(t, 2 * kPi);
  if (t < 0) t += 2 * kPi;
  if (t >= 2 * kPi - 1e-12) t = 0.0;
  return t;
}

// θ in [0, 2π) relative to the corner frame; angles within 1e-12 below 2π map to 0.
inline Polar local_polar(const Point& p, const Corner& c) {
  const Point d = p - c.vertex;
  const double r = d.norm();
  if (r == 0.0) return {0.0, 0.0};
  return {r, wrap_angle(std::atan2(d.y(), d.x()) - c.phi)};
}

struct Cutoff {
  double r0 = 0.5;
  double r1 = 1.0;
};

// χ and its first three radial derivatives.
inline std::array<double, 4> cutoff_eval_full(double r, const Cutoff& cut) {
  if (r <= cut.r0) return {1.0, 0.0, 0.0, 0.0};
  if (r >= cut.r1) return {0.0, 0.0, 0.0, 0.0};
  const double h = cut.r1 - cut.r0;
  const double t = (r - cut.r0) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double s = t3 * (10.0 - 15.0 * t + 6.0 * t2);
  const double s1 = 30.0 * t2 * (1.0 - t) * (1.0 - t);
  const double s2 = 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
  const double s3 = 60.0 * (1.0 - 6.0 * t + 6.0 * t2);
  return {1.0 - s, -s1 / h, -s2 / (h * h), -s3 / (h * h * h)};
}

inline std::array<double, 3> cutoff_eval(double r, const Cutoff& cut) {
  auto f = cutoff_eval_full(r, cut);
  return {f[0], f[1], f[2]};
}

namespace detail {

inline bool point_in_polygon(const Point& p, const std::vector<Point>& v) {
  bool in = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i].y() > p.y()) != (v[j].y() > p.y())) {
      const double x = v[j].x() + (p.y() - v[j].y()) * (v[i].x() - v[j].x()) / (v[i].y() - v[j].y());
      if (p.x() < x) in = !in;
    }
  }
  return in;
}

inline double polygon_area(const std::vector<Point>& v) {
  double a = 0.0;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) a += v[j].x() * v[i].y() - v[i].x() * v[j].y();
  return 0.5 * a;
}

inline Domain polygon_domain(std::string name, std::vector<Point> verts, std::vector<std::string> bcs) {
  Domain d;
  d.name = std::move(name);
  d.vertices = verts;
  for (std::size_t i = 0; i < verts.size(); ++i) {
    Edge e;
    e.a = verts[i];
    e.b = verts[(i + 1) % verts.size()];
    e.bc = bcs.empty() ? "dirichlet" : bcs[i];
    d.edges.push_back(e);
  }
  d.area = polygon_area(verts);
  double diam = 0.0;
  for (auto& p : verts)
    for (auto& q : verts) diam = std::max(diam, (p - q).norm());
  d.diameter = diam;
  d.inside = [verts](const Point& p) { return point_in_polygon(p, verts); };
  return d;
}

inline Region rect(double x0, double x1, double y0, double y1, bool masked = false) {
  Region r;
  r.kind = Region::Kind::Rect;
  r.x0 = x0; r.x1 = x1; r.y0 = y0; r.y1 = y1;
  r.masked = masked;
  return r;
}

inline Region polar(Point c, double r0, double r1, double t0, double t1) {
  Region r;
  r.kind = Region::Kind::Polar;
  r.center = c;
  r.r0 = r0; r.r1 = r1; r.t0 = t0; r.t1 = t1;
  return r;
}

}  // namespace detail

inline Domain make_preset_domain(const std::string& name) {
  using detail::polygon_domain;
  using detail::rect;
  const double at3 = std::atan(3.0);

  if (name == "unit_circle") {
    Domain d;
    d.name = name;
    Edge e;
    e.kind = Edge::Kind::Arc;
    e.radius = 1.0;
    e.t0 = 0.0;
    e.t1 = 2 * kPi;
    d.edges.push_back(e);
    d.regions.push_back(detail::polar(Point(0, 0), 0.0, 1.0, 0.0, 2 * kPi));
    d.inside = [](const Point& p) { return p.squaredNorm() < 1.0; };
    d.area = kPi;
    d.diameter = 2.0;
    return d;
  }
  if (name == "lshape") {
    Domain d = polygon_domain(name, {{0, -1}, {1, -1}, {1, 1}, {-1, 1}, {-1, 0}, {0, 0}}, {});
    d.corners.push_back({Point(0, 0), 1.5 * kPi, -0.5 * kPi, "reentrant"});
    d.regions = {rect(0, 1, -1, 0), rect(0, 1, 0, 1), rect(-1, 0, 0, 1)};
    return d;
  }
  if (name == "channel_cavity") {
    Domain d = polygon_domain(name, {{-2, 0}, {-1, 0}, {0, -3}, {1, 0}, {2, 0}, {2, 2}, {-2, 2}},
                              {"wall", "wall", "wall", "wall", "outflow", "wall", "inflow"});
    d.corners.push_back({Point(-1, 0), kPi + at3, -at3, "reentrant_left"});
    d.corners.push_back({Point(1, 0), kPi + at3, 0.0, "reentrant_right"});
    d.corners.push_back({Point(0, -3), 2.0 * std::atan(1.0 / 3.0), at3, "cavity_bottom"});
    d.regions = {rect(-2, 0, 0, 2), rect(0, 2, 0, 2), rect(-1, 1, -3, 0, true)};
    return d;
  }
  if (name == "sector") {
    const double a = kPi + std::acos(1.0 / std::sqrt(10.0));
    Domain d;
    d.name = name;
    d.vertices = {Point(0, 0), Point(1, 0), Point(std::cos(a), std::sin(a))};
    Edge e0;
    e0.a = Point(0, 0);
    e0.b = Point(1, 0);
    Edge arc;
    arc.kind = Edge::Kind::Arc;
    arc.radius = 1.0;
    arc.t0 = 0.0;
    arc.t1 = a;
    Edge e2;
    e2.a = d.vertices[2];
    e2.b = Point(0, 0);
    d.edges = {e0, arc, e2};
    d.corners.push_back({Point(0, 0), a, 0.0, "reentrant"});
    d.regions.push_back(detail::polar(Point(0, 0), 0.0, 1.0, 0.0, a));
    d.inside = [a](const Point& p) {
      const double r = p.norm();
      if (r >= 1.0 || r == 0.0) return false;
      const double t = std::atan2(p.y(), p.x());
      const double tw = t < 0 ? t + 2 * kPi : t;
      return tw > 0.0 && tw < a;
    };
    d.area = 0.5 * a;
    d.diameter = 2.0;
    d.boundary_total = true;
    return d;
  }
  if (name == "wedge") {
    Domain d = polygon_domain(name, {{0, -3}, {1, 0}, {-1, 0}}, {"wall", "lid", "wall"});
    d.corners.push_back({Point(0, -3), 2.0 * std::atan(1.0 / 3.0), at3, "bottom"});
    d.regions = {rect(-1, 1, -3, 0, true)};
    return d;
  }
  throw ConfigError("unknown domain preset '" + name + "'");
}

}  // namespace xgnn
