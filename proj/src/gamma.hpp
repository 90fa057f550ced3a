#pragma once

#include <array>

#include "svd.hpp"

namespace ginv {

// Partition of Gamma = V^T H U at the rank r:
//   X = V1^T H U1 (r x r)        Y = V1^T H U2 (r x (m-r))
//   Z = V2^T H U1 ((n-r) x r)    W = V2^T H U2 ((n-r) x (m-r))
// Blocks with a zero dimension stay as genuinely empty matrices.
struct BlockGamma {
  Mat X;
  Mat Y;
  Mat Z;
  Mat W;
};

BlockGamma gamma_from_H(const SvdFactors& f, const Mat& h);

// Inverse map H = V Gamma U^T.
Mat h_from_gamma(const SvdFactors& f, const BlockGamma& g);

// H for the structured family X = Dinv, Y = 0, W = 0:
//   H = G + V2 Z U1^T, with Z of shape (n-r) x r.
Mat h_from_z(const SvdFactors& f, const Mat& z);

// Frobenius norms of the block conditions that mirror the four Penrose
// properties on the Gamma side:
//   [0] ||X - Dinv||_F   [1] ||Z D Y - W||_F   [2] ||Y||_F   [3] ||Z||_F
std::array<double, 4> block_residuals(const SvdFactors& f,
                                      const BlockGamma& g);

}  // namespace ginv
