#include "properties.hpp"

#include "errors.hpp"

namespace ginv {

std::array<double, 4> property_residuals(const Mat& a, const Mat& h) {
  if (h.rows() != a.cols() || h.cols() != a.rows()) {
    throw Error(ErrorCode::Dimension,
                "property_residuals: H must be cols(A) x rows(A)");
  }
  require_finite(a, "property_residuals: A");
  require_finite(h, "property_residuals: H");

  const Mat ah = a * h;
  const Mat ha = h * a;
  std::array<double, 4> r;
  r[0] = (ah * a - a).norm();
  r[1] = (ha * h - h).norm();
  r[2] = (ah.transpose() - ah).norm();
  r[3] = (ha.transpose() - ha).norm();
  return r;
}

bool property_holds(double residual, double a_norm, double tol) {
  return residual <= tol * a_norm;
}

}  // namespace ginv
