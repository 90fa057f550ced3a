#pragma once

#include "dense.hpp"
#include "tolerances.hpp"

namespace ginv {

// Full singular value decomposition A = U diag(sigma) V^T together with the
// numerical rank r and the blocks every downstream consumer needs. U is
// m x m, V is n x n, sigma has min(m,n) entries in nonincreasing order.
//
// Sign convention: each column of V is flipped so that its entry of largest
// magnitude (first such index on ties) is positive; for columns j < min(m,n)
// the matching column of U flips with it so the product is unchanged.
// Trailing columns of U are normalized the same way on their own. This makes
// the factorization a deterministic function of A.
struct SvdFactors {
  Mat U;
  Mat V;
  Vec sigma;
  Index rank = 0;

  // Pseudoinverse V1 * Dinv * U1^T, cached because every formulation and
  // residual check reuses it.
  Mat G;

  Index rows() const { return U.rows(); }
  Index cols() const { return V.rows(); }

  auto U1() const { return U.leftCols(rank); }
  auto U2() const { return U.rightCols(U.cols() - rank); }
  auto V1() const { return V.leftCols(rank); }
  auto V2() const { return V.rightCols(V.cols() - rank); }

  // First r singular values and their reciprocals.
  Vec d() const { return sigma.head(rank); }
  Vec dinv() const { return sigma.head(rank).cwiseInverse(); }

  // m x n rectangular diag(sigma), for reconstruction checks.
  Mat sigma_matrix() const;
};

// Decomposes a nonzero finite matrix. Throws ZeroMatrix when every entry of
// A is zero, InvalidArgument on non-finite input, Config/Rank on a bad
// override.
SvdFactors svd(const Mat& a, const ToleranceConfig& cfg = {});

// Moore-Penrose pseudoinverse assembled from the factors (equals factors.G).
Mat mp_pseudoinverse(const SvdFactors& factors);

}  // namespace ginv
