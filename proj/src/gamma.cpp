#include "gamma.hpp"

namespace ginv {

namespace {

void require_h_shape(const SvdFactors& f, const Mat& h, const char* who) {
  if (h.rows() != f.cols() || h.cols() != f.rows()) {
    throw Error(ErrorCode::Dimension,
                std::string(who) + ": H must be cols(A) x rows(A)");
  }
}

}  // namespace

BlockGamma gamma_from_H(const SvdFactors& f, const Mat& h) {
  require_h_shape(f, h, "gamma_from_H");
  require_finite(h, "gamma_from_H: H");
  const Mat vth = f.V.transpose() * h;
  const Mat gamma = vth * f.U;
  const Index r = f.rank;
  BlockGamma g;
  g.X = gamma.topLeftCorner(r, r);
  g.Y = gamma.topRightCorner(r, gamma.cols() - r);
  g.Z = gamma.bottomLeftCorner(gamma.rows() - r, r);
  g.W = gamma.bottomRightCorner(gamma.rows() - r, gamma.cols() - r);
  return g;
}

Mat h_from_gamma(const SvdFactors& f, const BlockGamma& g) {
  const Index r = f.rank;
  const Index m = f.rows();
  const Index n = f.cols();
  if (g.X.rows() != r || g.X.cols() != r || g.Y.rows() != r ||
      g.Y.cols() != m - r || g.Z.rows() != n - r || g.Z.cols() != r ||
      g.W.rows() != n - r || g.W.cols() != m - r) {
    throw Error(ErrorCode::Dimension, "h_from_gamma: block shapes disagree");
  }
  Mat gamma(n, m);
  gamma.topLeftCorner(r, r) = g.X;
  gamma.topRightCorner(r, m - r) = g.Y;
  gamma.bottomLeftCorner(n - r, r) = g.Z;
  gamma.bottomRightCorner(n - r, m - r) = g.W;
  return f.V * gamma * f.U.transpose();
}

Mat h_from_z(const SvdFactors& f, const Mat& z) {
  const Index r = f.rank;
  if (z.rows() != f.cols() - r || z.cols() != r) {
    throw Error(ErrorCode::Dimension,
                "h_from_z: Z must be (cols(A)-r) x r");
  }
  require_finite(z, "h_from_z: Z");
  if (z.size() == 0) return f.G;
  return f.G + f.V2() * z * f.U1().transpose();
}

std::array<double, 4> block_residuals(const SvdFactors& f,
                                      const BlockGamma& g) {
  std::array<double, 4> r;
  r[0] = (g.X - Mat(f.dinv().asDiagonal())).norm();
  if (g.Z.size() == 0 || g.Y.size() == 0) {
    // Z D Y has a zero inner or outer dimension; only W can contribute.
    r[1] = g.W.norm();
  } else {
    r[1] = (g.Z * f.d().asDiagonal() * g.Y - g.W).norm();
  }
  r[2] = g.Y.norm();
  r[3] = g.Z.norm();
  return r;
}

}  // namespace ginv
