#pragma once

#include <Eigen/Dense>

#include "errors.hpp"

namespace ginv {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

bool is_finite(const Mat& a);

// Throws Error(InvalidArgument) when `a` holds a NaN or infinity.
void require_finite(const Mat& a, const char* what);

// Entrywise 1-norm: sum of |a_ij|.
double norm_1(const Mat& a);

// 2,1-norm: sum over rows of the row 2-norm.
double norm_21(const Mat& a);

// Number of entries with |a_ij| > zero_tol.
Index norm_0(const Mat& a, double zero_tol);

// Number of rows with at least one entry above zero_tol in magnitude.
Index nonzero_rows(const Mat& a, double zero_tol);

// Sparsity metrics of a candidate inverse, all measured with the same
// zero threshold.
struct Metrics {
  Index nonzero_rows = 0;
  Index norm0 = 0;
  double norm1 = 0.0;
  double norm21 = 0.0;
};

Metrics compute_metrics(const Mat& a, double zero_tol);

}  // namespace ginv
