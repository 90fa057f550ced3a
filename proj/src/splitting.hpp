#pragma once

#include "dense.hpp"

namespace ginv {

// Proximal pieces shared by the splitting solvers. All of them are exact
// closed forms, so the only inexactness in the iterations is the fixed
// point residual itself.

// Entrywise soft threshold: prox of t * ||.||_1.
void soft_threshold(Mat& a, double t);

// Rowwise soft threshold: prox of t * ||.||_{2,1}; each row is shortened
// by t in Euclidean length, or zeroed.
void row_shrink(Mat& a, double t);

// Euclidean projection onto { M : sum_i ||row_i(M)||_2 <= radius }. The row
// norms are projected onto the simplex-scaled l1 ball, which shrinks every
// row by one common threshold.
void project_ball_21(Mat& a, double radius);

// Threshold tau such that sum_i max(0, rho_i - tau) == radius, for the
// nonnegative vector rho with sum > radius.
double ball_21_threshold(const Vec& rho, double radius);

}  // namespace ginv
