#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <stdexcept>
#include <vector>

#include "xgnn/parallel.hpp"
#include "xgnn/quadrature.hpp"

namespace xgnn {

struct LsqResult {
  Vec x;
  int rank = 0;
  bool all_truncated = false;
};

// Minimum-norm least-squares solution of A x = F for symmetric A. For a
// symmetric matrix the singular values are the absolute eigenvalues, so the
// eigendecomposition gives the SVD; values below rtol·σ_max are discarded.
inline LsqResult truncated_lsq(const Mat& A, const Vec& F, double rtol = 1e-10) {
  LsqResult out;
  out.x = Vec::Zero(F.size());
  if (A.rows() == 0) return out;
  Eigen::SelfAdjointEigenSolver<Mat> es(A);
  const Vec& lam = es.eigenvalues();
  const double smax = lam.cwiseAbs().maxCoeff();
  if (!(smax > 0.0)) {
    out.all_truncated = true;
    return out;
  }
  const Mat& V = es.eigenvectors();
  Vec proj = V.transpose() * F;
  for (int k = 0; k < lam.size(); ++k) {
    if (std::abs(lam[k]) > rtol * smax) {
      proj[k] /= lam[k];
      ++out.rank;
    } else {
      proj[k] = 0.0;
    }
  }
  out.x = V * proj;
  return out;
}

// RᵀR accumulated over fixed row blocks in block order, so the result does not
// depend on the worker count.
inline Mat gram(const Mat& R) {
  constexpr int kBlock = 2048;
  const int n = static_cast<int>(R.rows()), k = static_cast<int>(R.cols());
  const int nb = std::max(1, (n + kBlock - 1) / kBlock);
  std::vector<Mat> part(nb);
  parallel_for(nb, [&](int b0, int b1) {
    for (int b = b0; b < b1; ++b) {
      const int r0 = b * kBlock, r1 = std::min(n, r0 + kBlock);
      part[b] = Mat::Zero(k, k);
      if (r1 > r0) part[b].selfadjointView<Eigen::Lower>().rankUpdate(R.middleRows(r0, r1 - r0).transpose());
    }
  }, 1);
  Mat A = Mat::Zero(k, k);
  for (const auto& P : part) A += P;
  A.triangularView<Eigen::StrictlyUpper>() = A.transpose();
  return A;
}

struct BlockSystem {
  Mat A;
  Vec F;
};

// Columns of R are residual vectors of the candidate functions; e is the
// residual data minus the residual of the previous iterate.
inline BlockSystem assemble_block_system(const Mat& R, const Vec& e) {
  if (R.rows() != e.size()) throw std::invalid_argument("assemble_block_system: dimension mismatch");
  return {gram(R), R.transpose() * e};
}

}  // namespace xgnn
