#include "dense.hpp"

#include <string>

namespace ginv {

bool is_finite(const Mat& a) { return a.allFinite(); }

void require_finite(const Mat& a, const char* what) {
  if (!a.allFinite()) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(what) + " contains a non-finite entry");
  }
}

double norm_1(const Mat& a) { return a.cwiseAbs().sum(); }

double norm_21(const Mat& a) { return a.rowwise().norm().sum(); }

Index norm_0(const Mat& a, double zero_tol) {
  return (a.cwiseAbs().array() > zero_tol).count();
}

Index nonzero_rows(const Mat& a, double zero_tol) {
  if (a.cols() == 0) return 0;
  Index count = 0;
  for (Index i = 0; i < a.rows(); ++i) {
    if (a.row(i).cwiseAbs().maxCoeff() > zero_tol) ++count;
  }
  return count;
}

Metrics compute_metrics(const Mat& a, double zero_tol) {
  Metrics m;
  m.nonzero_rows = nonzero_rows(a, zero_tol);
  m.norm0 = norm_0(a, zero_tol);
  m.norm1 = norm_1(a);
  m.norm21 = norm_21(a);
  return m;
}

}  // namespace ginv
