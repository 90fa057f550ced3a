#include "svd.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace ginv {

namespace {

// Index of the entry with the largest magnitude, first one on ties.
Index dominant_index(const Eigen::Ref<const Vec>& v) {
  Index best = 0;
  double best_abs = std::abs(v(0));
  for (Index i = 1; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    if (a > best_abs) {
      best_abs = a;
      best = i;
    }
  }
  return best;
}

}  // namespace

Mat SvdFactors::sigma_matrix() const {
  Mat s = Mat::Zero(rows(), cols());
  for (Index i = 0; i < sigma.size(); ++i) s(i, i) = sigma(i);
  return s;
}

SvdFactors svd(const Mat& a, const ToleranceConfig& cfg) {
  cfg.validate();
  if (a.rows() == 0 || a.cols() == 0) {
    throw Error(ErrorCode::Dimension, "svd: matrix must be nonempty");
  }
  require_finite(a, "svd: input");
  if (a.cwiseAbs().maxCoeff() == 0.0) {
    throw Error(ErrorCode::ZeroMatrix, "svd: input is the zero matrix");
  }

  const Index m = a.rows();
  const Index n = a.cols();
  const Index k = std::min(m, n);

  Eigen::BDCSVD<Mat> dec(a, Eigen::ComputeFullU | Eigen::ComputeFullV);

  SvdFactors f;
  f.U = dec.matrixU();
  f.V = dec.matrixV();
  f.sigma = dec.singularValues();

  // Deterministic signs: V leads, paired U columns follow. Trailing columns
  // beyond min(m,n) affect nothing numerically but are normalized anyway so
  // serialized factors are reproducible.
  for (Index j = 0; j < k; ++j) {
    if (f.V(dominant_index(f.V.col(j)), j) < 0.0) {
      f.V.col(j) = -f.V.col(j);
      f.U.col(j) = -f.U.col(j);
    }
  }
  for (Index j = k; j < n; ++j) {
    if (f.V(dominant_index(f.V.col(j)), j) < 0.0) f.V.col(j) = -f.V.col(j);
  }
  for (Index j = k; j < m; ++j) {
    if (f.U(dominant_index(f.U.col(j)), j) < 0.0) f.U.col(j) = -f.U.col(j);
  }

  if (cfg.rank_override >= 1) {
    if (cfg.rank_override > k) {
      throw Error(ErrorCode::Rank, "svd: rank_override exceeds min(m, n)");
    }
    f.rank = cfg.rank_override;
    if (f.sigma(f.rank - 1) <= 0.0) {
      throw Error(ErrorCode::Rank,
                  "svd: rank_override reaches a zero singular value");
    }
  } else {
    const double cutoff = cfg.effective_rank_tol(m, n) * f.sigma(0);
    Index r = 0;
    while (r < k && f.sigma(r) > cutoff) ++r;
    if (r == 0) {
      throw Error(ErrorCode::ZeroMatrix, "svd: numerical rank is zero");
    }
    f.rank = r;
  }

  f.G = f.V1() * f.dinv().asDiagonal() * f.U1().transpose();
  return f;
}

Mat mp_pseudoinverse(const SvdFactors& factors) { return factors.G; }

}  // namespace ginv
