#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "xgnn/output.hpp"
#include "xgnn/presets.hpp"

using namespace xgnn;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  fs::path d = fs::temp_directory_path() / ("xgnn_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

xgnn::Setup tiny(const std::string& preset, Config* out = nullptr) {
  Config c = preset_defaults(preset);
  c.set_int("quad.interior_n", 6);
  c.set_int("quad.boundary_n", 6);
  c.set_int("train.width0", 4);
  c.set_int("train.steps", 10);
  c.set_int("train.max_basis", 2);
  if (preset == "example_3_2") c.set_int("knowledge.count", 2);
  if (out) *out = c;
  return make_setup(load_preset(c));
}

}  // namespace

TEST(Csv, RealFormatting) {
  EXPECT_EQ(csv_real(std::nan("")), "");
  EXPECT_EQ(csv_real(0.1), "0.10000000000000001");
  EXPECT_EQ(csv_real(2.0), "2");
}

TEST(History, ZeroIterationIsHeaderOnly) {
  fs::path d = scratch("hist0");
  write_history(d / "history.csv", RunHistory{});
  EXPECT_EQ(slurp(d / "history.csv"), "iter,eta,energy_error,l2_error,h1_error,h2_error,width,lr,seconds\n");
}

TEST(History, EmptyErrorCellsWithoutExactSolution) {
  HistoryRow r;
  r.iter = 2;
  r.eta = 0.5;
  r.width = 40;
  r.lr = 0.25;
  EXPECT_EQ(history_line(r), "2,0.5,,,,,40,0.25,\n");
}

TEST(History, RowsAreFlushedIncrementally) {
  fs::path d = scratch("hist1");
  HistoryWriter w(d / "history.csv");
  HistoryRow r;
  r.iter = 1;
  r.eta = 1.0;
  w.append(r);
  const std::string s = slurp(d / "history.csv");
  EXPECT_NE(s.find("\n1,1,"), std::string::npos);
}

TEST(History, UnwritablePathNamesThePath) {
  try {
    write_history("/nonexistent_dir_xgnn/history.csv", RunHistory{});
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent_dir_xgnn/history.csv"), std::string::npos);
  }
}

TEST(Pencil, TableForChannelCorner) {
  fs::path d = scratch("pencil");
  write_pencil(d / "pencil.csv", biharmonic_exponents(kPi + std::atan(3.0), 2, false));
  const std::string s = slurp(d / "pencil.csv");
  EXPECT_EQ(s.rfind("alpha,re_lambda,im_lambda,residual\n", 0), 0u);
  EXPECT_NE(s.find(",1.58223"), std::string::npos);
}

TEST(MuTrace, Format) {
  fs::path d = scratch("mu");
  RunHistory h;
  h.mu_trace.push_back({0, 3, 0.5, 0.0});
  write_mu_trace(d / "mu_trace.csv", h);
  EXPECT_EQ(slurp(d / "mu_trace.csv"), "step,term_id,re_mu,im_mu\n0,3,0.5,0\n");
}

TEST(Fields, PoissonGridInsideDomain) {
  xgnn::Setup s = tiny("example_3_2");
  TrainConfig t;
  t.width0 = 4;
  t.steps = 5;
  t.max_basis = 1;
  RunResult r = run_adaptive(s, t);
  FieldGrid g = field_grid(r.subspace, s, 21);
  ASSERT_EQ(g.values.size(), 1u);
  EXPECT_GT(g.x.size(), 0);
  EXPECT_LT(g.x.size(), 21 * 21);
  for (int k = 0; k < g.x.size(); ++k) EXPECT_TRUE(s.domain.inside(Point(g.x[k], g.y[k])));
  fs::path d = scratch("fields");
  write_fields(d, r.subspace, s, 1, 11);
  EXPECT_TRUE(fs::exists(d / "field_u_iter1.csv"));
}

TEST(Fields, StokesPressureHasZeroMeanOnRule) {
  Config c;
  xgnn::Setup s = tiny("example_4_3", &c);
  RunResult r = run_adaptive(s, train_from_config(resolve_config(c)));
  FieldGrid g = field_grid(r.subspace, s, 15);
  ASSERT_EQ(g.values.size(), 3u);
  fs::path d = scratch("stokes_fields");
  write_fields(d, r.subspace, s, 2, 9);
  for (const char* n : {"u1", "u2", "p"}) EXPECT_TRUE(fs::exists(d / ("field_" + std::string(n) + "_iter2.csv")));
  const Vec& p = r.subspace.interior[2][kV];
  const double mean = s.q.w.dot(p) / s.q.w.sum();
  // the grid values are shifted by the rule mean
  auto raw = r.subspace.eval(s.domain, g.x, g.y);
  EXPECT_NEAR(g.values[2][0], raw[2][kV][0] - mean, 1e-12 * std::max(1.0, std::abs(mean)));
}

TEST(Determinism, HistoryBytesRepeat) {
  Config c;
  xgnn::Setup s = tiny("example_3_2", &c);
  TrainConfig t = train_from_config(resolve_config(c));
  fs::path d = scratch("det");
  write_history(d / "a.csv", run_adaptive(s, t).history);
  write_history(d / "b.csv", run_adaptive(s, t).history);
  EXPECT_EQ(slurp(d / "a.csv"), slurp(d / "b.csv"));
}
