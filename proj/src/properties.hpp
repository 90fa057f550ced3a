#pragma once

#include <array>

#include "dense.hpp"

namespace ginv {

// Frobenius residuals of the four Penrose properties for a candidate
// inverse H (n x m) of A (m x n):
//   [0] ||A H A - A||_F      (generalized inverse)
//   [1] ||H A H - H||_F      (reflexivity)
//   [2] ||(A H)^T - A H||_F  (A H symmetric)
//   [3] ||(H A)^T - H A||_F  (H A symmetric)
std::array<double, 4> property_residuals(const Mat& a, const Mat& h);

// True when the residual is at or below tol * ||A||_F.
bool property_holds(double residual, double a_norm, double tol);

}  // namespace ginv
