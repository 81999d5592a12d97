#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "xgnn/errors.hpp"
#include "xgnn/fields.hpp"
#include "xgnn/forms.hpp"
#include "xgnn/knowledge.hpp"
#include "xgnn/linalg.hpp"

namespace xgnn {

// Everything fixed for one run: rules, residual map and exact-solution traces.
struct Setup {
  Domain domain;
  FormSpec spec;
  ProblemData data;
  QuadRule q;
  BoundaryRule b;
  ResidualMap map;
  Vec data_vec;
  std::vector<ChannelMask> mask_in, mask_bd;
  ChannelMask any_in{}, any_bd{};
  bool has_exact = false;
  Vec r_exact;
  std::vector<Bundle> exact_in;

  int ncomp() const { return spec.components(); }
  // components entering the L²/H¹/H² error table (velocity only for Stokes)
  int error_comps() const { return spec.problem == Problem::Poisson ? 1 : 2; }
};

inline Setup make_setup(Domain d, FormSpec spec, ProblemData data, QuadRule q, BoundaryRule b) {
  Setup s;
  s.domain = std::move(d);
  s.spec = std::move(spec);
  s.data = std::move(data);
  s.q = compact(q);
  s.b = std::move(b);
  s.map = build_residual_map(s.spec, s.domain, s.q, s.b, s.data);
  s.data_vec = s.map.data();
  for (int c = 0; c < s.ncomp(); ++c) {
    s.mask_in.push_back(s.map.mask(c, false));
    s.mask_bd.push_back(s.map.mask(c, true));
  }
  s.any_in = s.map.mask_any(false);
  s.any_bd = s.map.mask_any(true);
  if (s.data.exact) {
    s.has_exact = true;
    s.exact_in = sample(s.data.exact, s.ncomp(), s.q.x, s.q.y);
    s.r_exact = s.map.apply(s.exact_in, sample(s.data.exact, s.ncomp(), s.b.x, s.b.y));
  }
  return s;
}

struct KnowledgeConfig {
  bool enabled = false;
  Family family = Family::PoissonCorner;
  bool trainable = false;
  std::vector<KnowledgeTerm> fixed;  // fixed mode: used by every basis function
  std::vector<KnowledgeTerm> slots;  // trainable mode: corner and cutoff templates
  int m_star = 1;
  double init_lo = 0.0, init_hi = 1.0;
  double init_im_lo = 0.0, init_im_hi = 0.0;
  double mu_lr_scale = 1.0;
  double mu_min_re = 0.05;
};

struct TrainConfig {
  int width0 = 20;
  double width_growth = 2.0;
  int depth = 1;
  double scale0 = 1.0, scale_step = 0.25;
  double lr0 = 1e-3, lr_decay = 1.1;
  int steps = 500;
  std::string optimizer = "gradient";  // gradient | momentum | adam
  double momentum = 0.9;
  double rtol = 1e-10;
  double tol = 0.0;
  int max_basis = 4;
  bool split_knowledge = true;
  bool timing = false;
  std::uint64_t seed = 0;
  KnowledgeConfig knowledge;

  int width(int i) const { return std::max(1, static_cast<int>(std::lround(width0 * std::pow(width_growth, i - 1)))); }
  double scale(int i) const { return scale0 + scale_step * i; }
  double lr(int i) const { return lr0 / std::pow(lr_decay, i - 1); }

  void validate() const {
    if (width0 < 1) throw ConfigError("train.width0 must be >= 1");
    if (!(width_growth > 0.0)) throw ConfigError("train.width_growth must be > 0");
    if (depth < 1) throw ConfigError("train.depth must be >= 1");
    if (steps < 1) throw ConfigError("train.steps must be >= 1");
    if (max_basis < 1) throw ConfigError("train.max_basis must be >= 1");
    if (!(lr0 > 0.0)) throw ConfigError("train.lr0 must be > 0");
    if (!(lr_decay > 0.0)) throw ConfigError("train.lr_decay must be > 0");
    if (!(rtol > 0.0)) throw ConfigError("train.rtol must be > 0");
    if (optimizer != "gradient" && optimizer != "momentum" && optimizer != "adam")
      throw ConfigError("train.optimizer must be gradient, momentum or adam");
    if (knowledge.enabled && knowledge.trainable) {
      if (knowledge.family == Family::StokesDirichlet4)
        throw ConfigError("knowledge.family stokes_dirichlet4 cannot be trainable");
      if (knowledge.m_star < 1) throw ConfigError("knowledge.m_star must be >= 1");
      if (knowledge.slots.empty()) throw ConfigError("knowledge.corners is empty");
    }
  }
};

struct BasisFunction {
  int iteration = 0;
  std::vector<NeuralField> neural;  // output coefficients already scaled to unit energy
  std::vector<KnowledgeTerm> terms;
  std::vector<Vec> term_coef;
  double raw_norm = 0.0;
  double eta = 0.0;
  int best_step = 0;
  std::vector<double> objective;  // per evaluation
  Vec r_neural, r_knowledge;
  std::vector<Bundle> in_neural, in_knowledge;

  bool has_knowledge() const { return !terms.empty(); }
  Vec residual() const { return r_knowledge.size() ? Vec(r_neural + r_knowledge) : r_neural; }

  // part: 0 both, 1 neural, 2 knowledge
  std::vector<Bundle> eval(const Domain& d, const Vec& x, const Vec& y, int part = 0,
                           const ChannelMask& mask = kAllChannels) const {
    const int nc = static_cast<int>(neural.size());
    std::vector<Bundle> out(nc);
    for (auto& b : out)
      for (int ch = 0; ch < kChannels; ++ch)
        if (mask[ch]) b[ch] = Vec::Zero(x.size());
    if (part != 2)
      for (int c = 0; c < nc; ++c) {
        Bundle nb = eval_bundle(neural[c], x, y, mask);
        for (int ch = 0; ch < kChannels; ++ch)
          if (mask[ch]) out[c][ch] += nb[ch];
      }
    if (part != 1)
      for (std::size_t t = 0; t < terms.size(); ++t) {
        TermTraces tr = eval_term(terms[t], d.corners.at(terms[t].corner), x, y, mask);
        for (int k = 0; k < tr.ncols; ++k)
          for (int c = 0; c < tr.ncomp && c < nc; ++c)
            for (int ch = 0; ch < kChannels; ++ch)
              if (mask[ch]) out[c][ch] += term_coef[t][k] * tr.value[k][c][ch];
      }
    return out;
  }
};

struct Subspace {
  std::vector<BasisFunction> basis;
  std::vector<std::pair<int, int>> columns;  // (basis index, part)
  Mat gram;
  Vec load, coef;
  Vec residual;                   // R(u_i)
  std::vector<Bundle> interior;   // u_i on the interior rule
  double orthogonality = 0.0;     // max_k |F(φ_k) − a(u_i, φ_k)| / (|||φ_k||| ‖data‖)
  int rank = 0;

  std::vector<Bundle> eval(const Domain& d, const Vec& x, const Vec& y, const ChannelMask& mask = kAllChannels) const {
    std::vector<Bundle> out;
    for (std::size_t k = 0; k < columns.size(); ++k) {
      auto f = basis[columns[k].first].eval(d, x, y, columns[k].second, mask);
      if (out.empty()) {
        out = f;
        for (auto& b : out)
          for (auto& v : b)
            if (v.size()) v *= coef[k];
        continue;
      }
      for (std::size_t c = 0; c < out.size(); ++c)
        for (int ch = 0; ch < kChannels; ++ch)
          if (mask[ch]) out[c][ch] += coef[k] * f[c][ch];
    }
    return out;
  }
};

struct HistoryRow {
  int iter = 0;
  double eta = 0.0;
  double energy_error = std::numeric_limits<double>::quiet_NaN();
  double l2_error = std::numeric_limits<double>::quiet_NaN();
  double h1_error = std::numeric_limits<double>::quiet_NaN();
  double h2_error = std::numeric_limits<double>::quiet_NaN();
  int width = 0;
  double lr = 0.0;
  double seconds = std::numeric_limits<double>::quiet_NaN();
  double err_prev = std::numeric_limits<double>::quiet_NaN();  // |||u − u_{i−1}|||
  double orthogonality = 0.0;
};

struct MuRow {
  int step = 0;
  int term_id = 0;
  double re = 0.0, im = 0.0;
};

struct RunHistory {
  std::vector<HistoryRow> rows;
  std::vector<MuRow> mu_trace;
  std::string stop_reason;
};

struct ErrorNorms {
  double l2 = 0.0, h1 = 0.0, h2 = 0.0;
};

// Sobolev norms of a difference of bundles on a rule; H² sums the multi-indices
// |α| ≤ 2 with ∂xy counted once.
inline ErrorNorms bundle_norms(const std::vector<Bundle>& a, const std::vector<Bundle>* b, int ncomp, const Vec& w) {
  double s[kChannels] = {0, 0, 0, 0, 0, 0};
  for (int c = 0; c < ncomp; ++c)
    for (int ch = 0; ch < kChannels; ++ch) {
      Eigen::ArrayXd d = a[c][ch].array();
      if (b) d -= (*b)[c][ch].array();
      s[ch] += (w.array() * d.square()).sum();
    }
  ErrorNorms n;
  n.l2 = std::sqrt(s[kV]);
  n.h1 = std::sqrt(s[kV] + s[kX] + s[kY]);
  n.h2 = std::sqrt(s[kV] + s[kX] + s[kY] + s[kXX] + s[kXY] + s[kYY]);
  return n;
}

// Admissible lower bound on Re μ for a trainable family.
inline double mu_lower_bound(Family f, const std::vector<double>& beta) {
  const double b = beta.empty() ? 0.0 : *std::min_element(beta.begin(), beta.end());
  if (f == Family::PoissonCorner) return std::max(0.05, 1.0 - b);
  return std::max(1.05, 2.0 - b);
}

struct Objective {
  double J = 0.0;
  double vnorm = 0.0;
  Vec coef;
  Vec grad;    // hidden parameters of every network, then (Re μ, Im μ) per trainable term
  Vec grad_c;  // ∂J/∂coef at fixed parameters
  bool finite = true;
};

// Maximizes e·R(v)/‖R(v)‖ over one basis function: network parameters and
// trainable μ by gradient ascent, linear coefficients by least squares.
class BasisTrainer {
 public:
  BasisTrainer(const Setup& s, const TrainConfig& cfg, int iteration, Vec e, std::vector<KnowledgeTerm> trainable,
               std::vector<KnowledgeTerm> fixed, std::mt19937_64& rng)
      : s_(s), cfg_(cfg), iter_(iteration), e_(std::move(e)), trainable_(std::move(trainable)), fixed_(std::move(fixed)) {
    if (e_.size() != s_.map.size()) throw std::invalid_argument("BasisTrainer: residual size mismatch");
    for (int c = 0; c < s_.ncomp(); ++c)
      nets_.push_back(init_network(cfg_.width(iter_), cfg_.depth, cfg_.scale(iter_), rng));
    mu_bound_ = cfg_.knowledge.mu_min_re;
    fixed_cols_ = knowledge_columns(fixed_, nullptr, nullptr);
  }

  const std::vector<NeuralField>& nets() const { return nets_; }
  std::vector<NeuralField>& nets() { return nets_; }
  const std::vector<KnowledgeTerm>& trainable_terms() const { return trainable_; }
  std::vector<KnowledgeTerm>& trainable_terms() { return trainable_; }
  const std::vector<KnowledgeTerm>& fixed_terms() const { return fixed_; }

  int hidden_count() const {
    int n = 0;
    for (const auto& f : nets_) n += f.hidden_param_count();
    return n;
  }
  int param_count() const { return hidden_count() + 2 * static_cast<int>(trainable_.size()); }
  int neural_columns() const {
    int n = 0;
    for (const auto& f : nets_) n += f.width();
    return n;
  }
  int trainable_columns() const {
    int n = 0;
    for (const auto& t : trainable_) n += column_count(t);
    return n;
  }
  int column_total() const { return neural_columns() + trainable_columns() + static_cast<int>(fixed_cols_.cols()); }

  Vec params() const {
    Vec p(param_count());
    int at = 0;
    for (const auto& f : nets_) {
      Vec h = get_params(f);
      p.segment(at, h.size()) = h;
      at += static_cast<int>(h.size());
    }
    for (const auto& t : trainable_) {
      p[at++] = t.mu.real();
      p[at++] = t.mu.imag();
    }
    return p;
  }
  void set_params(const Vec& p) {
    int at = 0;
    for (auto& f : nets_) {
      const int n = f.hidden_param_count();
      set_params_of(f, p.segment(at, n));
      at += n;
    }
    for (auto& t : trainable_) {
      t.mu = {p[at], p[at + 1]};
      at += 2;
    }
  }

  // Objective with least-squares coefficients.
  Objective evaluate(bool with_grad) { return run(nullptr, with_grad); }
  // Objective at given coefficients (column order: networks, trainable terms, fixed terms).
  Objective evaluate_with(const Vec& coef, bool with_grad) { return run(&coef, with_grad); }

  BasisFunction train(RunHistory* hist = nullptr, int* global_step = nullptr) {
    const int P = param_count();
    const int H = hidden_count();
    const double lr = cfg_.lr(iter_);
    Vec rate = Vec::Constant(P, lr);
    for (int k = H; k < P; ++k) rate[k] = lr * cfg_.knowledge.mu_lr_scale;
    Vec m1 = Vec::Zero(P), m2 = Vec::Zero(P);
    const double b2 = 0.999;

    BasisFunction phi;
    phi.iteration = iter_;
    std::vector<NeuralField> best_nets = nets_;
    std::vector<KnowledgeTerm> best_terms = trainable_;
    double best = -std::numeric_limits<double>::infinity();

    for (int step = 0; step <= cfg_.steps; ++step) {
      Objective obj = evaluate(step < cfg_.steps);
      if (!obj.finite) {
        project_mu();
        obj = evaluate(step < cfg_.steps);
        if (!obj.finite) throw NumericalError(diagnostic(step));
      }
      if (hist) {
        const int gs = global_step ? (*global_step)++ : step;
        for (const auto& t : trainable_) hist->mu_trace.push_back({gs, t.id, t.mu.real(), t.mu.imag()});
      }
      phi.objective.push_back(obj.J);
      if (obj.J > best) {
        best = obj.J;
        best_nets = nets_;
        best_terms = trainable_;
        phi.best_step = step;
      }
      if (step == cfg_.steps) break;
      Vec p = params();
      const Vec& g = obj.grad;
      if (cfg_.optimizer == "gradient") {
        p += rate.cwiseProduct(g);
      } else if (cfg_.optimizer == "momentum") {
        m1 = cfg_.momentum * m1 + g;
        p += rate.cwiseProduct(m1);
      } else {
        const double t = step + 1.0;
        m1 = cfg_.momentum * m1 + (1.0 - cfg_.momentum) * g;
        m2 = b2 * m2 + (1.0 - b2) * g.cwiseAbs2();
        const double c1 = 1.0 - std::pow(cfg_.momentum, t), c2 = 1.0 - std::pow(b2, t);
        p.array() += rate.array() * (m1.array() / c1) / ((m2.array() / c2).sqrt() + 1e-8);
      }
      set_params(p);
      if (leaves_interval()) project_mu();
    }
    nets_ = best_nets;
    trainable_ = best_terms;
    freeze(phi);
    return phi;
  }

  double mu_bound() const { return mu_bound_; }
  void set_mu_bound(double b) { mu_bound_ = b; }

 private:
  static void set_params_of(NeuralField& f, const Vec& p) { xgnn::set_params(f, p); }

  bool leaves_interval() const {
    for (const auto& t : trainable_)
      if (!(t.mu.real() >= mu_bound_) || !std::isfinite(t.mu.imag())) return true;
    return false;
  }
  void project_mu() {
    for (auto& t : trainable_) {
      double re = t.mu.real(), im = t.mu.imag();
      if (!(re >= mu_bound_)) re = mu_bound_;
      if (!std::isfinite(im)) im = 0.0;
      if (t.family != Family::StokesMoffatt) im = 0.0;
      t.mu = {re, im};
    }
  }
  std::string diagnostic(int step) const {
    std::string m = "non-finite objective at iteration " + std::to_string(iter_) + ", step " + std::to_string(step);
    for (const auto& t : trainable_)
      m += "; term " + std::to_string(t.id) + " mu = " + std::to_string(t.mu.real()) + "+" + std::to_string(t.mu.imag()) + "i";
    return m;
  }

  // Residual columns of knowledge terms; with d_xi/d_zeta also their μ-derivatives.
  Mat knowledge_columns(const std::vector<KnowledgeTerm>& terms, Mat* d_xi, Mat* d_zeta) const {
    int n = 0;
    for (const auto& t : terms) n += column_count(t);
    Mat R(s_.map.size(), n);
    if (d_xi) { d_xi->resize(s_.map.size(), n); d_zeta->resize(s_.map.size(), n); }
    int at = 0;
    for (const auto& t : terms) {
      const Corner& c = s_.domain.corners.at(t.corner);
      const bool md = d_xi != nullptr;
      TermTraces ti = eval_term(t, c, s_.q.x, s_.q.y, s_.any_in, md);
      TermTraces tb = eval_term(t, c, s_.b.x, s_.b.y, s_.any_bd, md);
      for (int k = 0; k < ti.ncols; ++k, ++at) {
        R.col(at) = s_.map.apply(pad(ti.value[k]), pad(tb.value[k]));
        if (md) {
          d_xi->col(at) = s_.map.apply(pad(ti.dxi[k]), pad(tb.dxi[k]));
          d_zeta->col(at) = s_.map.apply(pad(ti.dzeta[k]), pad(tb.dzeta[k]));
        }
      }
    }
    return R;
  }
  // a Poisson term feeding a Stokes map (or vice versa) is not meaningful; components beyond the term's are zero
  std::vector<Bundle> pad(const std::vector<Bundle>& v) const {
    if (static_cast<int>(v.size()) == s_.ncomp()) return v;
    std::vector<Bundle> out(s_.ncomp());
    for (int c = 0; c < s_.ncomp(); ++c) {
      if (c < static_cast<int>(v.size())) { out[c] = v[c]; continue; }
      for (int ch = 0; ch < kChannels; ++ch)
        if (v[0][ch].size()) out[c][ch] = Vec::Zero(v[0][ch].size());
    }
    return out;
  }

  Objective run(const Vec* given, bool with_grad) {
    const int nn = neural_columns(), nt = trainable_columns(), nf = static_cast<int>(fixed_cols_.cols());
    const int K = nn + nt + nf;
    Mat R(s_.map.size(), K);
    int at = 0;
    for (int c = 0; c < s_.ncomp(); ++c) {
      const int w = nets_[c].width();
      UnitBundle ui = eval_units(nets_[c], s_.q.x, s_.q.y, s_.mask_in[c]);
      UnitBundle ub = eval_units(nets_[c], s_.b.x, s_.b.y, s_.mask_bd[c]);
      R.middleCols(at, w) = s_.map.apply_units(c, ui, ub, w);
      at += w;
    }
    Mat dxi, dze;
    if (nt) R.middleCols(at, nt) = knowledge_columns(trainable_, &dxi, &dze);
    at += nt;
    if (nf) R.middleCols(at, nf) = fixed_cols_;

    Objective o;
    if (given) {
      if (given->size() != K) throw std::invalid_argument("evaluate_with: coefficient size mismatch");
      o.coef = *given;
    } else {
      BlockSystem sys = assemble_block_system(R, e_);
      o.coef = truncated_lsq(sys.A, sys.F, cfg_.rtol).x;
    }
    const Vec v = R * o.coef;
    o.vnorm = v.norm();
    o.J = o.vnorm > 0.0 ? e_.dot(v) / o.vnorm : 0.0;
    o.finite = std::isfinite(o.J) && o.coef.allFinite();
    if (!with_grad || !o.finite) return o;

    o.grad = Vec::Zero(param_count());
    o.grad_c = Vec::Zero(K);
    if (o.vnorm == 0.0) return o;
    const Vec g = e_ / o.vnorm - (o.J / (o.vnorm * o.vnorm)) * v;
    o.grad_c = R.transpose() * g;
    auto adj_in = s_.map.adjoint(g, false);
    auto adj_bd = s_.map.adjoint(g, true);
    int pat = 0, cat = 0;
    for (int c = 0; c < s_.ncomp(); ++c) {
      const int w = nets_[c].width(), P = nets_[c].hidden_param_count();
      const Vec cc = o.coef.segment(cat, w);
      o.grad.segment(pat, P) = hidden_gradient(nets_[c], s_.q.x, s_.q.y, adj_in[c], cc) +
                               hidden_gradient(nets_[c], s_.b.x, s_.b.y, adj_bd[c], cc);
      pat += P;
      cat += w;
    }
    int col = 0;
    for (const auto& t : trainable_) {
      double gx = 0.0, gz = 0.0;
      for (int k = 0; k < column_count(t); ++k, ++col) {
        gx += o.coef[nn + col] * g.dot(dxi.col(col));
        gz += o.coef[nn + col] * g.dot(dze.col(col));
      }
      o.grad[pat++] = gx;
      o.grad[pat++] = t.family == Family::StokesMoffatt ? gz : 0.0;
    }
    return o;
  }

  void freeze(BasisFunction& phi) {
    Objective o = evaluate(false);
    if (!o.finite) throw NumericalError(diagnostic(cfg_.steps));
    phi.eta = o.J;
    phi.raw_norm = o.vnorm;
    const double inv = o.vnorm > 0.0 ? 1.0 / o.vnorm : 0.0;
    phi.r_neural = Vec::Zero(s_.map.size());
    phi.in_neural.assign(s_.ncomp(), Bundle{});
    int at = 0;
    for (int c = 0; c < s_.ncomp(); ++c) {
      NeuralField f = nets_[c];
      const int w = f.width();
      f.c = o.coef.segment(at, w) * inv;
      at += w;
      UnitBundle ui = eval_units(f, s_.q.x, s_.q.y, s_.mask_in[c]);
      UnitBundle ub = eval_units(f, s_.b.x, s_.b.y, s_.mask_bd[c]);
      phi.r_neural += s_.map.apply_units(c, ui, ub, w) * f.c;
      phi.in_neural[c] = eval_bundle(f, s_.q.x, s_.q.y);
      phi.neural.push_back(std::move(f));
    }
    std::vector<KnowledgeTerm> all = trainable_;
    all.insert(all.end(), fixed_.begin(), fixed_.end());
    if (all.empty()) return;
    phi.r_knowledge = Vec::Zero(s_.map.size());
    phi.in_knowledge.assign(s_.ncomp(), Bundle{});
    for (auto& b : phi.in_knowledge)
      for (auto& v : b) v = Vec::Zero(s_.q.size());
    for (const auto& t : all) {
      const int nc = column_count(t);
      Vec d = o.coef.segment(at, nc) * inv;
      at += nc;
      const Corner& c = s_.domain.corners.at(t.corner);
      TermTraces ti = eval_term(t, c, s_.q.x, s_.q.y, kAllChannels);
      TermTraces tb = eval_term(t, c, s_.b.x, s_.b.y, s_.any_bd);
      for (int k = 0; k < nc; ++k) {
        phi.r_knowledge += d[k] * s_.map.apply(pad(ti.value[k]), pad(tb.value[k]));
        for (int m = 0; m < ti.ncomp && m < s_.ncomp(); ++m)
          for (int ch = 0; ch < kChannels; ++ch) phi.in_knowledge[m][ch] += d[k] * ti.value[k][m][ch];
      }
      phi.terms.push_back(t);
      phi.term_coef.push_back(d);
    }
  }

  const Setup& s_;
  const TrainConfig& cfg_;
  int iter_;
  Vec e_;
  std::vector<KnowledgeTerm> trainable_, fixed_;
  std::vector<NeuralField> nets_;
  Mat fixed_cols_;
  double mu_bound_ = 0.05;
};

// Galerkin projection of the data onto the span of the basis (neural and
// knowledge parts as separate columns when split).
inline void galerkin_update(Subspace& S, const Setup& s, double rtol = 1e-10, bool split = true) {
  if (S.basis.empty()) throw std::invalid_argument("galerkin_update: empty subspace");
  S.columns.clear();
  std::vector<const Vec*> cols_n, cols_k;
  for (std::size_t i = 0; i < S.basis.size(); ++i) {
    const auto& f = S.basis[i];
    if (split && f.has_knowledge() && !f.neural.empty()) {
      S.columns.push_back({static_cast<int>(i), 1});
      S.columns.push_back({static_cast<int>(i), 2});
    } else {
      S.columns.push_back({static_cast<int>(i), 0});
    }
  }
  const int K = static_cast<int>(S.columns.size());
  Mat C(s.map.size(), K);
  for (int k = 0; k < K; ++k) {
    const auto& f = S.basis[S.columns[k].first];
    const int part = S.columns[k].second;
    C.col(k) = part == 1 ? f.r_neural : part == 2 ? f.r_knowledge : f.residual();
  }
  BlockSystem sys = assemble_block_system(C, s.data_vec);
  S.gram = sys.A;
  S.load = sys.F;
  LsqResult ls = truncated_lsq(S.gram, S.load, rtol);
  S.coef = ls.x;
  S.rank = ls.rank;
  S.residual = C * S.coef;

  S.interior.assign(s.ncomp(), Bundle{});
  for (auto& b : S.interior)
    for (auto& v : b) v = Vec::Zero(s.q.size());
  for (int k = 0; k < K; ++k) {
    const auto& f = S.basis[S.columns[k].first];
    const int part = S.columns[k].second;
    for (int c = 0; c < s.ncomp(); ++c)
      for (int ch = 0; ch < kChannels; ++ch) {
        if (part != 2) S.interior[c][ch] += S.coef[k] * f.in_neural[c][ch];
        if (part != 1 && f.has_knowledge()) S.interior[c][ch] += S.coef[k] * f.in_knowledge[c][ch];
      }
  }

  const double scale = std::max(s.data_vec.norm(), std::numeric_limits<double>::min());
  S.orthogonality = 0.0;
  for (const auto& f : S.basis) {
    const Vec r = f.residual();
    const double nr = r.norm();
    if (nr == 0.0) continue;
    S.orthogonality = std::max(S.orthogonality, std::abs(s.data_vec.dot(r) - S.residual.dot(r)) / (nr * scale));
  }
}

struct RunResult {
  RunHistory history;
  Subspace subspace;
};

struct RunCallbacks {
  std::function<void(const HistoryRow&, const Subspace&)> on_iteration;
};

inline std::vector<KnowledgeTerm> sample_trainable_terms(const TrainConfig& cfg, std::mt19937_64& rng, int& next_id) {
  std::vector<KnowledgeTerm> out;
  const auto& k = cfg.knowledge;
  for (const auto& slot : k.slots)
    for (int j = 0; j < k.m_star; ++j) {
      KnowledgeTerm t = slot;
      t.family = k.family;
      t.trainable = true;
      const double re = uniform(rng, k.init_lo, k.init_hi);
      const double im = k.family == Family::StokesMoffatt ? uniform(rng, k.init_im_lo, k.init_im_hi) : 0.0;
      t.mu = {re, im};
      t.id = next_id++;
      out.push_back(t);
    }
  return out;
}

inline RunResult run_adaptive(const Setup& s, const TrainConfig& cfg, const RunCallbacks& cb = {}) {
  cfg.validate();
  RunResult out;
  Subspace& S = out.subspace;
  std::mt19937_64 rng(cfg.seed);
  Vec Ru = Vec::Zero(s.map.size());
  int global_step = 0;
  int next_id = static_cast<int>(cfg.knowledge.fixed.size());
  std::vector<KnowledgeTerm> frozen;
  for (int i = 1; i <= cfg.max_basis; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<KnowledgeTerm> trainable, fixed;
    if (cfg.knowledge.enabled) {
      if (cfg.knowledge.trainable) {
        fixed = frozen;
        trainable = sample_trainable_terms(cfg, rng, next_id);
      } else {
        fixed = cfg.knowledge.fixed;
      }
    }
    HistoryRow row;
    row.iter = i;
    row.width = cfg.width(i);
    row.lr = cfg.lr(i);
    if (s.has_exact) row.err_prev = (s.r_exact - Ru).norm();
    BasisTrainer tr(s, cfg, i, s.data_vec - Ru, trainable, fixed, rng);
    tr.set_mu_bound(cfg.knowledge.mu_min_re);
    BasisFunction phi = tr.train(&out.history, &global_step);
    for (const auto& t : tr.trainable_terms()) {
      KnowledgeTerm f = t;
      f.trainable = false;
      frozen.push_back(f);
    }
    row.eta = phi.eta;
    S.basis.push_back(std::move(phi));
    galerkin_update(S, s, cfg.rtol, cfg.split_knowledge);
    Ru = S.residual;
    row.orthogonality = S.orthogonality;
    if (s.has_exact) {
      row.energy_error = (s.r_exact - Ru).norm();
      ErrorNorms en = bundle_norms(S.interior, &s.exact_in, s.error_comps(), s.q.w);
      row.l2_error = en.l2;
      row.h1_error = en.h1;
      row.h2_error = en.h2;
    }
    if (cfg.timing) row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.history.rows.push_back(row);
    if (cb.on_iteration) cb.on_iteration(row, S);
    if (row.eta < cfg.tol) {
      out.history.stop_reason = "tol";
      return out;
    }
  }
  out.history.stop_reason = "max_basis";
  return out;
}

}  // namespace xgnn
