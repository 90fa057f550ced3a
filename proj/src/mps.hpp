#pragma once

#include <iosfwd>
#include <string>

#include "reduced.hpp"

namespace ginv {

// Writes the epigraph LP of the P123 reduced problem in fixed MPS format:
//   minimize  sum_k F_k
//   F_k - (V2 Z U1^T)_k >= G_k      rows RP0000001..
//   F_k + (V2 Z U1^T)_k >= -G_k     rows RM0000001..
// with F_k >= 0 (MPS default) and Z free. k runs row-major over the n x m
// entries of H, so there are n*m F variables, (n-r)*r Z variables and
// 2*n*m constraint rows. Only P123 problems can be exported.
void export_lp(const ReducedProblem& problem, std::ostream& out);
void export_lp(const ReducedProblem& problem, const std::string& path);

}  // namespace ginv
