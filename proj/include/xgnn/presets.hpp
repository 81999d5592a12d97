#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "xgnn/config.hpp"
#include "xgnn/errors.hpp"
#include "xgnn/forms.hpp"
#include "xgnn/geometry.hpp"
#include "xgnn/jet.hpp"
#include "xgnn/pencil.hpp"
#include "xgnn/quadrature.hpp"
#include "xgnn/solver.hpp"

namespace xgnn {

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> n{"example_2_2", "example_3_1", "example_3_2", "example_3_4",
                                          "example_4_1", "example_4_2", "example_4_3"};
  return n;
}

inline std::string preset_domain_name(const std::string& preset) {
  if (preset == "example_2_2") return "unit_circle";
  if (preset == "example_3_1" || preset == "example_3_2" || preset == "example_4_1") return "lshape";
  if (preset == "example_3_4") return "channel_cavity";
  if (preset == "example_4_2") return "sector";
  if (preset == "example_4_3") return "wedge";
  throw ConfigError("unknown preset '" + preset + "'");
}

inline Problem preset_problem(const std::string& preset) {
  preset_domain_name(preset);
  return preset == "example_3_4" || preset == "example_4_2" || preset == "example_4_3" ? Problem::Stokes
                                                                                       : Problem::Poisson;
}

// Default value of every config key for a preset.
inline Config preset_defaults(const std::string& name) {
  preset_domain_name(name);
  Config c;
  c.set_string("preset", name);
  c.set_int("seed", 0);
  c.set_int("quad.interior_n", 128);
  c.set_int("quad.boundary_n", 128);
  c.set_string("quad.boundary_scheme", "gauss");
  c.set_int("quad.grading", 0);
  c.set_list("form.beta", {});
  c.set_real("form.delta", 1e3);
  c.set_int("form.sb", 1);
  c.set_int("train.width0", 20);
  c.set_real("train.width_growth", 2.0);
  c.set_int("train.depth", 1);
  c.set_real("train.scale0", 1.0);
  c.set_real("train.scale_step", 0.25);
  c.set_real("train.lr0", 4e-3);
  c.set_real("train.lr_decay", 1.1);
  c.set_int("train.steps", 500);
  c.set_string("train.optimizer", "gradient");
  c.set_real("train.momentum", 0.9);
  c.set_real("train.rtol", 1e-10);
  c.set_real("train.tol", 0.0);
  c.set_int("train.max_basis", 6);
  c.set_bool("train.split_knowledge", true);
  c.set_string("knowledge.family", "none");
  c.set_string("knowledge.mode", "fixed");
  c.set_int("knowledge.count", 0);
  c.set_list("knowledge.mu_re", {});
  c.set_list("knowledge.mu_im", {});
  c.set_int("knowledge.m_star", 1);
  c.set_real("knowledge.init_lo", 0.0);
  c.set_real("knowledge.init_hi", 1.0);
  c.set_real("knowledge.init_im_lo", 0.0);
  c.set_real("knowledge.init_im_hi", 0.0);
  c.set_real("knowledge.mu_lr_scale", 1.0);
  c.set_real("knowledge.mu_min_re", 0.05);
  c.set_list("knowledge.cutoff_r0", {});
  c.set_list("knowledge.cutoff_r1", {});
  c.set_list("knowledge.corners", {0});
  c.set_int("problem.m", 2);
  c.set_real("problem.s", 0.0);
  c.set_real("problem.lambda", 0.25);
  c.set_int("output.grid", 101);
  c.set_bool("output.fields", true);
  c.set_bool("output.timing", false);

  if (name == "example_2_2") {
    c.set_int("quad.boundary_n", 256);
    c.set_string("quad.boundary_scheme", "riemann");
    c.set_int("form.sb", 0);
    c.set_real("train.lr0", 1e-3);
    c.set_real("form.delta", 1.0);  // m^{2s}, filled in by resolve_config
  } else if (name == "example_3_1") {
    c.set_list("form.beta", {1.0});
    c.set_int("train.max_basis", 7);
  } else if (name == "example_3_2") {
    c.set_list("form.beta", {4.0 / 3.0});
    c.set_string("knowledge.family", "poisson_corner");
    c.set_int("knowledge.count", 20);
    std::vector<double> mu;
    for (int j = 1; j <= 20; ++j) mu.push_back(2.0 * j / 3.0);
    c.set_list("knowledge.mu_re", mu);
    c.set_list("knowledge.mu_im", {0.0});
  } else if (name == "example_3_4") {
    c.set_list("form.beta", {5.0 / 3.0});
    c.set_real("train.lr0", 3e-3);
    c.set_string("knowledge.family", "stokes_dirichlet4");
    c.set_int("knowledge.count", 3);
    const Domain d = make_preset_domain("channel_cavity");
    std::vector<double> re, im;
    for (const auto& k : d.corners) {
      const bool convex = k.alpha < kPi;
      auto roots = biharmonic_exponents(k.alpha, 1, convex);
      re.push_back(roots[0].xi);
      im.push_back(roots[0].zeta);
    }
    c.set_list("knowledge.mu_re", re);
    c.set_list("knowledge.mu_im", im);
    c.set_list("knowledge.corners", {0, 1, 2});
    c.set_list("knowledge.cutoff_r0", {0.5, 0.5, 2.75});
    c.set_list("knowledge.cutoff_r1", {1.0, 1.0, 3.0});
  } else if (name == "example_4_1") {
    c.set_list("form.beta", {4.0 / 3.0});
    c.set_int("train.width0", 40);
    c.set_string("knowledge.family", "poisson_corner");
    c.set_string("knowledge.mode", "trainable");
    c.set_int("knowledge.count", 1);
    c.set_real("knowledge.init_lo", 0.0);
    c.set_real("knowledge.init_hi", 1.0);
    c.set_real("knowledge.mu_lr_scale", 20.0);
  } else if (name == "example_4_2") {
    const double alpha = kPi + std::acos(1.0 / std::sqrt(10.0));
    const double lam = biharmonic_exponents(alpha, 1, false)[0].xi;
    c.set_list("form.beta", {1.0});
    c.set_int("quad.boundary_n", 512);
    c.set_int("train.width0", 40);
    c.set_real("train.width_growth", 1.9);
    c.set_real("train.lr0", 3e-3);
    c.set_string("knowledge.family", "stokes_noslip");
    c.set_string("knowledge.mode", "trainable");
    c.set_int("knowledge.count", 1);
    c.set_real("knowledge.init_lo", lam - 1.0 / 3.0);
    c.set_real("knowledge.init_hi", lam + 1.0 / 3.0);
    c.set_list("knowledge.cutoff_r0", {0.5});
    c.set_list("knowledge.cutoff_r1", {0.9});
  } else if (name == "example_4_3") {
    const double alpha = 2.0 * std::atan(1.0 / 3.0);
    const auto root = biharmonic_exponents(alpha, 1, true)[0];
    c.set_list("form.beta", {1.0});
    c.set_int("quad.boundary_n", 256);
    c.set_int("train.width0", 40);
    c.set_real("train.width_growth", 1.9);
    c.set_real("train.lr0", 3e-3);
    c.set_string("knowledge.family", "stokes_moffatt");
    c.set_string("knowledge.mode", "trainable");
    c.set_int("knowledge.count", 1);
    c.set_real("knowledge.init_lo", root.xi - 0.5);
    c.set_real("knowledge.init_hi", root.xi + 0.5);
    c.set_real("knowledge.init_im_lo", root.zeta - 0.5);
    c.set_real("knowledge.init_im_hi", root.zeta + 0.5);
    c.set_list("knowledge.cutoff_r0", {2.0});
    c.set_list("knowledge.cutoff_r1", {2.8});
  }
  return c;
}

// Fills values derived from other keys unless the user set them, and checks ranges.
inline Config resolve_config(Config c) {
  const std::string preset = c.get_string("preset");
  preset_domain_name(preset);
  auto user = [&](const std::string& k) { return c.explicit_keys.count(k) != 0; };
  if (preset == "example_2_2" && !user("form.delta"))
    c.set_real("form.delta", std::pow(static_cast<double>(c.get_int("problem.m")), 2.0 * c.get_real("problem.s")));
  const std::string fam = c.get_string("knowledge.family");
  if (fam != "none" && !user("knowledge.mu_min_re")) {
    c.set_real("knowledge.mu_min_re", mu_lower_bound(parse_family(fam), c.get_list("form.beta")));
  }

  auto positive = [&](const std::string& k) {
    if (c.get_int(k) < 1) throw ConfigError("config key '" + k + "' must be >= 1");
  };
  for (const char* k : {"quad.interior_n", "quad.boundary_n", "train.width0", "train.depth", "train.steps",
                        "train.max_basis", "knowledge.m_star", "output.grid"})
    positive(k);
  if (c.get_int("quad.grading") < 0) throw ConfigError("config key 'quad.grading' must be >= 0");
  if (c.get_int("knowledge.count") < 0) throw ConfigError("config key 'knowledge.count' must be >= 0");
  const std::string scheme = c.get_string("quad.boundary_scheme");
  if (scheme != "gauss" && scheme != "riemann") throw ConfigError("config key 'quad.boundary_scheme' must be gauss or riemann");
  if (!(c.get_real("form.delta") >= 1.0)) throw ConfigError("config key 'form.delta' must be >= 1");
  const long long sb = c.get_int("form.sb");
  if (sb != 0 && sb != 1) throw ConfigError("config key 'form.sb' must be 0 or 1");
  for (double b : c.get_list("form.beta"))
    if (!std::isfinite(b) || b < 0.0) throw ConfigError("config key 'form.beta' entries must be finite and >= 0");
  for (const char* k : {"train.lr0", "train.lr_decay", "train.rtol", "train.width_growth"})
    if (!(c.get_real(k) > 0.0)) throw ConfigError(std::string("config key '") + k + "' must be > 0");
  const std::string opt = c.get_string("train.optimizer");
  if (opt != "gradient" && opt != "momentum" && opt != "adam")
    throw ConfigError("config key 'train.optimizer' must be gradient, momentum or adam");
  if (fam != "none") parse_family(fam);
  const std::string mode = c.get_string("knowledge.mode");
  if (mode != "fixed" && mode != "trainable") throw ConfigError("config key 'knowledge.mode' must be fixed or trainable");
  if (fam == "stokes_dirichlet4" && mode == "trainable")
    throw ConfigError("config key 'knowledge.mode': stokes_dirichlet4 cannot be trainable");
  if (fam != "none") {
    const bool stokes = preset_problem(preset) == Problem::Stokes;
    if (stokes != (fam != "poisson_corner"))
      throw ConfigError("config key 'knowledge.family': '" + fam + "' does not match the problem of " + preset);
  }
  if (c.get_list("knowledge.cutoff_r0").size() != c.get_list("knowledge.cutoff_r1").size())
    throw ConfigError("config keys 'knowledge.cutoff_r0' and 'knowledge.cutoff_r1' must have equal length");
  if (c.get_int("problem.m") < 1) throw ConfigError("config key 'problem.m' must be >= 1");
  return c;
}

namespace detail {

// r^m sin(mθ) = Im z^m
inline std::vector<PointBundle> harmonic_exact(double x, double y, int m) {
  using C = std::complex<double>;
  const C z(x, y);
  const C d1 = double(m) * (m >= 1 ? std::pow(z, m - 1) : C(0.0));
  const C d2 = double(m) * (m - 1.0) * (m >= 2 ? std::pow(z, m - 2) : C(0.0));
  const C v = std::pow(z, m);
  return {{v.imag(), d1.imag(), d1.real(), d2.imag(), d2.real(), -d2.imag()}};
}

// r^λ sin θ with θ = atan2(y, x)
inline std::vector<PointBundle> rlambda_exact(double x, double y, double lam) {
  if (x == 0.0 && y == 0.0) return {{0, 0, 0, 0, 0, 0}};
  auto pj = polar_jet<2>(x, y, 0.0, 0.0, 0.0);
  Jet<double, 2> v = exp(pj.logr * lam) * sin(pj.theta);
  PointBundle b;
  bundle_of(v, b);
  return {b};
}

inline std::array<double, 6> sector_boundary(double x, double y) {
  const double a0 = std::acos(1.0 / std::sqrt(10.0));
  const double r2 = x * x + y * y;
  if (r2 == 0.0) return {0, 0, 0, 0, 0, 0};
  const double t = wrap_angle(std::atan2(y, x));
  const double tx = -y / r2, ty = x / r2;
  const double u1 = -t * t / (2.0 * a0) + t, du1 = -t / a0 + 1.0;
  const double k = (-2.0 * a0 - 1.0) / (4.0 * a0 * a0);
  const double u2 = k * t * t * t + t * t + t, du2 = 3.0 * k * t * t + 2.0 * t + 1.0;
  return {u1, du1 * tx, du1 * ty, u2, du2 * tx, du2 * ty};
}

}  // namespace detail

inline ProblemData preset_data(const Config& c, const Domain& d) {
  const std::string name = c.get_string("preset");
  if (name == "example_2_2") {
    const int m = static_cast<int>(c.get_int("problem.m"));
    return manufactured(Problem::Poisson, [m](double x, double y) { return detail::harmonic_exact(x, y, m); });
  }
  if (name == "example_3_1") {
    const double lam = c.get_real("problem.lambda");
    return manufactured(Problem::Poisson, [lam](double x, double y) { return detail::rlambda_exact(x, y, lam); });
  }
  ProblemData data;
  if (name == "example_3_2" || name == "example_4_1") {
    data.source = [](double, double) { return std::array<double, 5>{1.0, 0, 0, 0, 0}; };
    data.boundary = [](double, double, int) { return std::array<double, 6>{}; };
    return data;
  }
  data.source = [](double, double) { return std::array<double, 5>{}; };
  if (name == "example_3_4") {
    std::vector<std::string> bc;
    for (const auto& e : d.edges) bc.push_back(e.bc);
    data.boundary = [bc](double, double y, int edge) {
      if (bc.at(edge) == "inflow" || bc.at(edge) == "outflow") return std::array<double, 6>{y * (2.0 - y), 0.0, 2.0 - 2.0 * y, 0, 0, 0};
      return std::array<double, 6>{};
    };
  } else if (name == "example_4_2") {
    data.boundary = [](double x, double y, int) { return detail::sector_boundary(x, y); };
  } else {
    std::vector<std::string> bc;
    for (const auto& e : d.edges) bc.push_back(e.bc);
    data.boundary = [bc](double x, double, int edge) {
      if (bc.at(edge) == "lid") return std::array<double, 6>{(1.0 - x) * (1.0 + x), -2.0 * x, 0.0, 0, 0, 0};
      return std::array<double, 6>{};
    };
  }
  return data;
}

// Knowledge terms described by the config: fixed terms or trainable slots.
inline KnowledgeConfig knowledge_from_config(const Config& c) {
  KnowledgeConfig k;
  const std::string fam = c.get_string("knowledge.family");
  if (fam == "none") return k;
  k.family = parse_family(fam);
  k.trainable = c.get_string("knowledge.mode") == "trainable";
  k.m_star = static_cast<int>(c.get_int("knowledge.m_star"));
  k.init_lo = c.get_real("knowledge.init_lo");
  k.init_hi = c.get_real("knowledge.init_hi");
  k.init_im_lo = c.get_real("knowledge.init_im_lo");
  k.init_im_hi = c.get_real("knowledge.init_im_hi");
  k.mu_lr_scale = c.get_real("knowledge.mu_lr_scale");
  k.mu_min_re = c.get_real("knowledge.mu_min_re");
  const int count = static_cast<int>(c.get_int("knowledge.count"));
  k.enabled = count > 0;
  if (!k.enabled) return k;
  const Domain d = make_preset_domain(preset_domain_name(c.get_string("preset")));

  auto pick = [&](const std::string& key, int j, double dflt) -> double {
    const auto& l = c.get_list(key);
    if (l.empty()) return dflt;
    if (l.size() == 1) return l[0];
    if (static_cast<int>(l.size()) <= j)
      throw ConfigError("config key '" + key + "' has " + std::to_string(l.size()) + " entries, need " + std::to_string(count));
    return l[j];
  };
  for (int j = 0; j < count; ++j) {
    KnowledgeTerm t;
    t.family = k.family;
    const double cr = pick("knowledge.corners", j, 0.0);
    t.corner = static_cast<int>(cr);
    if (t.corner != cr || t.corner < 0 || t.corner >= static_cast<int>(d.corners.size()))
      throw ConfigError("config key 'knowledge.corners': invalid corner index");
    if (!c.get_list("knowledge.cutoff_r0").empty()) {
      Cutoff cut{pick("knowledge.cutoff_r0", j, 0.0), pick("knowledge.cutoff_r1", j, 0.0)};
      if (!(cut.r0 > 0.0 && cut.r1 > cut.r0)) throw ConfigError("config keys 'knowledge.cutoff_r0/r1' need 0 < r0 < r1");
      t.cutoff = cut;
    }
    t.id = j;
    if (k.trainable) {
      t.trainable = true;
      k.slots.push_back(t);
    } else {
      t.mu = {pick("knowledge.mu_re", j, 1.0), pick("knowledge.mu_im", j, 0.0)};
      k.fixed.push_back(t);
    }
  }
  return k;
}

inline TrainConfig train_from_config(const Config& c) {
  TrainConfig t;
  t.width0 = static_cast<int>(c.get_int("train.width0"));
  t.width_growth = c.get_real("train.width_growth");
  t.depth = static_cast<int>(c.get_int("train.depth"));
  t.scale0 = c.get_real("train.scale0");
  t.scale_step = c.get_real("train.scale_step");
  t.lr0 = c.get_real("train.lr0");
  t.lr_decay = c.get_real("train.lr_decay");
  t.steps = static_cast<int>(c.get_int("train.steps"));
  t.optimizer = c.get_string("train.optimizer");
  t.momentum = c.get_real("train.momentum");
  t.rtol = c.get_real("train.rtol");
  t.tol = c.get_real("train.tol");
  t.max_basis = static_cast<int>(c.get_int("train.max_basis"));
  t.split_knowledge = c.get_bool("train.split_knowledge");
  t.timing = c.get_bool("output.timing");
  t.seed = static_cast<std::uint64_t>(c.get_int("seed"));
  t.knowledge = knowledge_from_config(c);
  t.validate();
  return t;
}

struct Preset {
  std::string name;
  Domain domain;
  ProblemData data;
  FormSpec form;
  TrainConfig train;
  int interior_n = 128, boundary_n = 128;
  BoundaryScheme scheme = BoundaryScheme::Gauss;
  int grading = 0;
  bool has_exact = false;
  Config config;
};

inline Preset load_preset(const Config& raw) {
  Preset p;
  p.config = resolve_config(raw);
  const Config& c = p.config;
  p.name = c.get_string("preset");
  p.domain = make_preset_domain(preset_domain_name(p.name));
  p.data = preset_data(c, p.domain);
  p.form.problem = preset_problem(p.name);
  p.form.beta = c.get_list("form.beta");
  if (p.form.beta.size() > 1 && p.form.beta.size() != p.domain.corners.size())
    throw ConfigError("config key 'form.beta' needs 1 or " + std::to_string(p.domain.corners.size()) + " entries");
  p.form.delta = c.get_real("form.delta");
  p.form.sb = static_cast<int>(c.get_int("form.sb"));
  p.train = train_from_config(c);
  p.interior_n = static_cast<int>(c.get_int("quad.interior_n"));
  p.boundary_n = static_cast<int>(c.get_int("quad.boundary_n"));
  p.scheme = c.get_string("quad.boundary_scheme") == "riemann" ? BoundaryScheme::Riemann : BoundaryScheme::Gauss;
  p.grading = static_cast<int>(c.get_int("quad.grading"));
  p.has_exact = static_cast<bool>(p.data.exact);
  return p;
}

inline Preset load_preset(const std::string& name) { return load_preset(preset_defaults(name)); }

inline Setup make_setup(const Preset& p) {
  return make_setup(p.domain, p.form, p.data, interior_rule(p.domain, p.interior_n, p.interior_n, p.grading),
                    boundary_rule(p.domain, p.boundary_n, p.scheme));
}

}  // namespace xgnn
