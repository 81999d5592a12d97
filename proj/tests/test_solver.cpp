#include <gtest/gtest.h>

#include <cstring>

#include "xgnn/solver.hpp"

using namespace xgnn;

namespace {

std::vector<PointBundle> smooth_exact(double x, double y) {
  const double e = std::exp(x) * std::sin(y);
  return {{x * x * y + e, 2 * x * y + e, x * x + std::exp(x) * std::cos(y), 2 * y + e,
           2 * x + std::exp(x) * std::cos(y), -e}};
}

// r^{2/3} sin(2θ/3) around the L-shape reentrant corner
std::vector<PointBundle> corner_exact(double x, double y) {
  const Domain d = make_preset_domain("lshape");
  KnowledgeTerm t;
  t.mu = {2.0 / 3.0, 0.0};
  auto tr = eval_term(t, d.corners[0], Vec::Constant(1, x), Vec::Constant(1, y));
  PointBundle b;
  for (int ch = 0; ch < kChannels; ++ch) b[ch] = tr.value[0][0][ch][0];
  return {b};
}

xgnn::Setup lshape_setup(ExactFn ex, double beta, int n = 12) {
  Domain d = make_preset_domain("lshape");
  FormSpec spec;
  spec.beta = {beta};
  spec.delta = 100.0;
  return make_setup(d, spec, manufactured(Problem::Poisson, ex), interior_rule(d, n, n), boundary_rule(d, n));
}

TrainConfig small_config() {
  TrainConfig c;
  c.width0 = 8;
  c.steps = 40;
  c.max_basis = 3;
  c.lr0 = 1e-2;
  c.seed = 5;
  return c;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST(TrainConfig, Schedules) {
  TrainConfig c;
  c.width0 = 20;
  c.lr0 = 4e-3;
  EXPECT_EQ(c.width(1), 20);
  EXPECT_EQ(c.width(3), 80);
  EXPECT_DOUBLE_EQ(c.scale(1), 1.25);
  EXPECT_DOUBLE_EQ(c.scale(4), 2.0);
  EXPECT_DOUBLE_EQ(c.lr(1), 4e-3);
  EXPECT_DOUBLE_EQ(c.lr(3), 4e-3 / (1.1 * 1.1));
}

TEST(TrainConfig, RejectsTrainableDirichlet) {
  TrainConfig c;
  c.knowledge.enabled = true;
  c.knowledge.trainable = true;
  c.knowledge.family = Family::StokesDirichlet4;
  c.knowledge.slots.push_back({});
  EXPECT_THROW(c.validate(), ConfigError);
  c.knowledge.family = Family::StokesNoslip;
  EXPECT_NO_THROW(c.validate());
  c.steps = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(MuBound, Families) {
  EXPECT_DOUBLE_EQ(mu_lower_bound(Family::PoissonCorner, {4.0 / 3.0}), 0.05);
  EXPECT_DOUBLE_EQ(mu_lower_bound(Family::PoissonCorner, {0.0}), 1.0);
  EXPECT_DOUBLE_EQ(mu_lower_bound(Family::StokesNoslip, {1.0}), 1.05);
  EXPECT_DOUBLE_EQ(mu_lower_bound(Family::StokesNoslip, {0.0}), 2.0);
}

class AdaptiveRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    setup_ = new xgnn::Setup(lshape_setup(smooth_exact, 1.0));
    result_ = new RunResult(run_adaptive(*setup_, small_config()));
  }
  static void TearDownTestSuite() {
    delete result_;
    delete setup_;
  }
  static xgnn::Setup* setup_;
  static RunResult* result_;
};
xgnn::Setup* AdaptiveRun::setup_ = nullptr;
RunResult* AdaptiveRun::result_ = nullptr;

TEST_F(AdaptiveRun, HistoryShape) {
  const auto& h = result_->history;
  ASSERT_EQ(h.rows.size(), 3u);
  EXPECT_EQ(h.stop_reason, "max_basis");
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(h.rows[i].iter, i + 1);
    EXPECT_EQ(h.rows[i].width, 8 << i);
    EXPECT_TRUE(std::isnan(h.rows[i].seconds));
  }
}

TEST_F(AdaptiveRun, EnergyErrorNonIncreasing) {
  const auto& r = result_->history.rows;
  EXPECT_LE(r[0].energy_error, r[0].err_prev * (1 + 1e-12));
  for (std::size_t i = 1; i < r.size(); ++i) EXPECT_LE(r[i].energy_error, r[i - 1].energy_error * (1 + 1e-12));
}

TEST_F(AdaptiveRun, EstimatorBoundedByError) {
  for (const auto& r : result_->history.rows) {
    EXPECT_GE(r.eta, 0.0);
    EXPECT_LE(r.eta, r.err_prev * (1 + 1e-10) + 1e-12);
  }
}

TEST_F(AdaptiveRun, ErrPrevChainsEnergyError) {
  const auto& r = result_->history.rows;
  for (std::size_t i = 1; i < r.size(); ++i) EXPECT_NEAR(r[i].err_prev, r[i - 1].energy_error, 1e-12 * r[i].err_prev);
}

TEST_F(AdaptiveRun, GalerkinOrthogonality) {
  for (const auto& r : result_->history.rows) EXPECT_LE(r.orthogonality, 1e-8);
}

TEST_F(AdaptiveRun, BasisFunctionsHaveUnitEnergy) {
  for (const auto& phi : result_->subspace.basis) EXPECT_NEAR(phi.residual().norm(), 1.0, 1e-8);
}

TEST_F(AdaptiveRun, GramDiagonalIsOne) {
  const Mat& G = result_->subspace.gram;
  for (int k = 0; k < G.rows(); ++k) EXPECT_NEAR(G(k, k), 1.0, 1e-10);
}

TEST_F(AdaptiveRun, EtaIsEarliestBestObjective) {
  for (const auto& phi : result_->subspace.basis) {
    ASSERT_FALSE(phi.objective.empty());
    const auto it = std::max_element(phi.objective.begin(), phi.objective.end());
    EXPECT_EQ(static_cast<int>(it - phi.objective.begin()), phi.best_step);
    EXPECT_NEAR(phi.eta, *it, 1e-12 * std::abs(*it));
  }
}

TEST_F(AdaptiveRun, ResidualMatchesEvaluatedSubspace) {
  const Subspace& S = result_->subspace;
  auto in = S.eval(setup_->domain, setup_->q.x, setup_->q.y);
  auto bd = S.eval(setup_->domain, setup_->b.x, setup_->b.y);
  Vec r = setup_->map.apply(in, bd);
  EXPECT_LT((r - S.residual).norm(), 1e-10 * S.residual.norm());
  EXPECT_LT((in[0][kV] - S.interior[0][kV]).cwiseAbs().maxCoeff(), 1e-10);
}

TEST_F(AdaptiveRun, Deterministic) {
  RunResult again = run_adaptive(*setup_, small_config());
  ASSERT_EQ(again.history.rows.size(), result_->history.rows.size());
  for (std::size_t i = 0; i < again.history.rows.size(); ++i) {
    EXPECT_TRUE(same_bits(again.history.rows[i].eta, result_->history.rows[i].eta));
    EXPECT_TRUE(same_bits(again.history.rows[i].energy_error, result_->history.rows[i].energy_error));
  }
}

TEST(Adaptive, InfiniteToleranceStopsAfterOne) {
  xgnn::Setup s = lshape_setup(smooth_exact, 1.0, 8);
  TrainConfig c = small_config();
  c.tol = std::numeric_limits<double>::infinity();
  RunResult r = run_adaptive(s, c);
  ASSERT_EQ(r.history.rows.size(), 1u);
  EXPECT_EQ(r.history.stop_reason, "tol");
  EXPECT_FALSE(std::isnan(r.history.rows[0].energy_error));
}

TEST(Adaptive, CallbackSeesEveryRow) {
  xgnn::Setup s = lshape_setup(smooth_exact, 0.0, 8);
  TrainConfig c = small_config();
  c.max_basis = 2;
  int calls = 0;
  RunCallbacks cb;
  cb.on_iteration = [&](const HistoryRow& row, const Subspace& S) {
    ++calls;
    EXPECT_EQ(row.iter, calls);
    EXPECT_EQ(static_cast<int>(S.basis.size()), calls);
  };
  run_adaptive(s, c, cb);
  EXPECT_EQ(calls, 2);
}

TEST(Adaptive, OptimizersImproveOnFirstEvaluation) {
  xgnn::Setup s = lshape_setup(smooth_exact, 1.0, 8);
  for (const char* opt : {"gradient", "momentum", "adam"}) {
    TrainConfig c = small_config();
    c.optimizer = opt;
    c.max_basis = 1;
    RunResult r = run_adaptive(s, c);
    const auto& phi = r.subspace.basis[0];
    EXPECT_GE(phi.eta, phi.objective.front()) << opt;
    EXPECT_EQ(static_cast<int>(phi.objective.size()), c.steps + 1) << opt;
  }
}

TEST(Trainer, ZeroResidualGivesZeroEstimator) {
  xgnn::Setup s = lshape_setup(smooth_exact, 1.0, 8);
  TrainConfig c = small_config();
  std::mt19937_64 rng(1);
  BasisTrainer tr(s, c, 1, s.data_vec - s.r_exact, {}, {}, rng);
  BasisFunction phi = tr.train();
  EXPECT_LE(phi.eta, 1e-6 * s.r_exact.norm());
}

TEST(Trainer, LinearCoefficientGradientVanishesAtOptimum) {
  xgnn::Setup s = lshape_setup(smooth_exact, 1.0, 8);
  std::mt19937_64 rng(2);
  BasisTrainer tr(s, small_config(), 1, s.data_vec, {}, {}, rng);
  Objective o = tr.evaluate(true);
  EXPECT_LT(o.grad_c.norm(), 1e-8 * std::max(1.0, o.coef.norm()));
}

TEST(Trainer, ObjectiveGradientMatchesFiniteDifferences) {
  xgnn::Setup s = lshape_setup(corner_exact, 4.0 / 3.0, 8);
  TrainConfig c = small_config();
  c.width0 = 4;
  c.knowledge.enabled = true;
  c.knowledge.trainable = true;
  c.knowledge.mu_min_re = 0.05;
  KnowledgeTerm t;
  t.mu = {0.55, 0.0};
  t.trainable = true;
  std::mt19937_64 rng(3);
  BasisTrainer tr(s, c, 1, s.data_vec, {t}, {}, rng);
  const Vec p0 = tr.params();
  Objective o = tr.evaluate(true);
  const Vec coef = o.coef;
  const double h = 1e-6;
  for (int k = 0; k < p0.size(); ++k) {
    if (k == p0.size() - 1) continue;  // Im μ is inert for the Poisson family
    Vec p = p0;
    p[k] += h;
    tr.set_params(p);
    const double fp = tr.evaluate_with(coef, false).J;
    p[k] -= 2 * h;
    tr.set_params(p);
    const double fm = tr.evaluate_with(coef, false).J;
    const double fd = (fp - fm) / (2 * h);
    EXPECT_NEAR(fd, o.grad[k], 1e-5 * std::max(1.0, o.grad.cwiseAbs().maxCoeff())) << "param " << k;
  }
  tr.set_params(p0);
}

TEST(ExactSubspace, SingleKnowledgeFunctionIsRecovered) {
  xgnn::Setup s = lshape_setup(corner_exact, 4.0 / 3.0, 16);
  TrainConfig c = small_config();
  c.max_basis = 1;
  c.knowledge.enabled = true;
  KnowledgeTerm t;
  t.mu = {2.0 / 3.0, 0.0};
  c.knowledge.fixed = {t};
  RunResult r = run_adaptive(s, c);
  const double unorm = s.r_exact.norm();
  const auto& row = r.history.rows.at(0);
  EXPECT_LE(row.energy_error, 1e-6 * unorm);
  EXPECT_NEAR(row.eta, unorm, 0.01 * unorm);
}

TEST(MuFreezing, EarlierTermsNeverChange) {
  xgnn::Setup s = lshape_setup(corner_exact, 4.0 / 3.0, 8);
  TrainConfig c = small_config();
  c.knowledge.enabled = true;
  c.knowledge.trainable = true;
  c.knowledge.init_lo = 0.3;
  c.knowledge.init_hi = 0.9;
  c.knowledge.slots.push_back({});
  c.knowledge.mu_min_re = 0.05;
  std::vector<std::complex<double>> first_seen;
  RunCallbacks cb;
  cb.on_iteration = [&](const HistoryRow&, const Subspace& S) {
    ASSERT_FALSE(S.basis[0].terms.empty());
    first_seen.push_back(S.basis[0].terms[0].mu);
  };
  RunResult r = run_adaptive(s, c, cb);
  ASSERT_EQ(first_seen.size(), 3u);
  const KnowledgeTerm& t0 = r.subspace.basis[0].terms.at(0);
  for (const auto& m : first_seen) {
    EXPECT_TRUE(same_bits(m.real(), t0.mu.real()));
    EXPECT_TRUE(same_bits(m.imag(), t0.mu.imag()));
  }
  // later basis functions carry the frozen term unchanged
  int carried = 0;
  for (std::size_t i = 1; i < r.subspace.basis.size(); ++i)
    for (const auto& t : r.subspace.basis[i].terms)
      if (t.id == t0.id) {
        ++carried;
        EXPECT_FALSE(t.trainable);
        EXPECT_TRUE(same_bits(t.mu.real(), t0.mu.real()));
      }
  EXPECT_EQ(carried, 2);
  EXPECT_EQ(r.history.mu_trace.size(), static_cast<std::size_t>(3 * (c.steps + 1)));
  for (const auto& m : r.history.mu_trace) EXPECT_GE(m.re, 0.05);
}

TEST(BundleNorms, SineOnCircle) {
  // u_i = 0 vs r sinθ = y on the unit circle: L² error √(π/4)
  Domain d = make_preset_domain("unit_circle");
  QuadRule q = interior_rule(d, 32, 32);
  std::vector<Bundle> a(1), zero(1);
  for (int ch = 0; ch < kChannels; ++ch) {
    a[0][ch] = Vec::Zero(q.size());
    zero[0][ch] = Vec::Zero(q.size());
  }
  a[0][kV] = q.y;
  a[0][kY] = Vec::Ones(q.size());
  ErrorNorms n = bundle_norms(a, &zero, 1, q.w);
  EXPECT_NEAR(n.l2, std::sqrt(kPi / 4), 1e-12);
  EXPECT_NEAR(n.h1, std::sqrt(kPi / 4 + kPi), 1e-12);
  EXPECT_NEAR(n.h2, n.h1, 1e-15);
  ErrorNorms same = bundle_norms(a, &a, 1, q.w);
  EXPECT_EQ(same.h2, 0.0);
}
