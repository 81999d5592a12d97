#include <gtest/gtest.h>

#include <random>

#include "xgnn/fields.hpp"
#include "xgnn/linalg.hpp"

using namespace xgnn;

TEST(TruncatedLsq, IdentityReturnsRhs) {
  Vec F(3);
  F << 1, -2, 3;
  auto r = truncated_lsq(Mat::Identity(3, 3), F);
  EXPECT_LT((r.x - F).norm(), 1e-15);
  EXPECT_EQ(r.rank, 3);
}

TEST(TruncatedLsq, TinyEigenvalueDropped) {
  Mat A = Mat::Zero(2, 2);
  A(0, 0) = 1.0;
  A(1, 1) = 1e-16;
  Vec F(2);
  F << 2.0, 1.0;
  auto r = truncated_lsq(A, F, 1e-12);
  EXPECT_NEAR(r.x[0], 2.0, 1e-15);
  EXPECT_EQ(r.x[1], 0.0);
  EXPECT_EQ(r.rank, 1);
}

TEST(TruncatedLsq, ZeroMatrixAllTruncated) {
  auto r = truncated_lsq(Mat::Zero(3, 3), Vec::Ones(3));
  EXPECT_TRUE(r.all_truncated);
  EXPECT_EQ(r.x, Vec::Zero(3));
}

TEST(TruncatedLsq, DuplicateColumnStaysFinite) {
  std::mt19937_64 rng(2);
  Mat R(40, 3);
  for (int i = 0; i < 40; ++i) {
    R(i, 0) = uniform_pm1(rng);
    R(i, 1) = uniform_pm1(rng);
  }
  R.col(2) = R.col(0);
  Vec e(40);
  for (auto& v : e) v = uniform_pm1(rng);
  auto sys = assemble_block_system(R, e);
  auto r = truncated_lsq(sys.A, sys.F);
  EXPECT_TRUE(r.x.allFinite());
  EXPECT_EQ(r.rank, 2);
  EXPECT_NEAR(r.x[0], r.x[2], 1e-10);  // minimum-norm split
}

TEST(TruncatedLsq, SolutionMinimizesResidual) {
  std::mt19937_64 rng(7);
  Mat R(60, 5);
  Vec e(60);
  for (int i = 0; i < 60; ++i) {
    for (int j = 0; j < 5; ++j) R(i, j) = uniform_pm1(rng);
    e[i] = uniform_pm1(rng);
  }
  auto sys = assemble_block_system(R, e);
  Vec x = truncated_lsq(sys.A, sys.F).x;
  const double best = (R * x - e).norm();
  for (int t = 0; t < 50; ++t) {
    Vec d(5);
    for (auto& v : d) v = 1e-3 * uniform_pm1(rng);
    EXPECT_GE((R * (x + d) - e).norm(), best);
  }
}

TEST(Gram, MatchesDenseProductAcrossBlocks) {
  std::mt19937_64 rng(4);
  Mat R(5000, 7);
  for (int i = 0; i < R.rows(); ++i)
    for (int j = 0; j < R.cols(); ++j) R(i, j) = uniform_pm1(rng);
  Mat A = gram(R);
  Mat ref = R.transpose() * R;
  EXPECT_LT((A - ref).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_EQ(A, A.transpose());
}

TEST(Gram, IndependentOfThreadCount) {
  std::mt19937_64 rng(5);
  Mat R(9000, 4);
  for (int i = 0; i < R.rows(); ++i)
    for (int j = 0; j < R.cols(); ++j) R(i, j) = uniform_pm1(rng);
  setenv("XGNN_THREADS", "1", 1);
  Mat a = gram(R);
  setenv("XGNN_THREADS", "3", 1);
  Mat b = gram(R);
  unsetenv("XGNN_THREADS");
  EXPECT_EQ(a, b);
}

TEST(BlockSystem, MismatchThrows) {
  EXPECT_THROW(assemble_block_system(Mat::Zero(4, 2), Vec::Zero(5)), std::invalid_argument);
}

TEST(BlockSystem, EmptyColumns) {
  auto s = assemble_block_system(Mat::Zero(4, 0), Vec::Ones(4));
  EXPECT_EQ(s.A.rows(), 0);
  EXPECT_EQ(truncated_lsq(s.A, s.F).x.size(), 0);
}
