#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <string>

#include "gamma.hpp"

namespace ginv {

// The three reduced programs over the free block Z ((n-r) x r):
//   P21   minimize the 2,1-norm of G + V2 Z U1^T
//   P21L1 minimize the entrywise 1-norm subject to the 2,1-norm staying
//         within z_budget (relaxed by a fixed delta)
//   P123  minimize the entrywise 1-norm
// Every member of the family satisfies A H A = A and (A H)^T = A H by
// construction; P21 solutions additionally satisfy H A H = H once rows are
// dropped, and P123 keeps all three by the same structure.
enum class ProblemKind { P21, P21L1, P123 };

const char* problem_kind_name(ProblemKind k);

struct ReducedProblem {
  ProblemKind kind = ProblemKind::P21;
  std::shared_ptr<const SvdFactors> factors;
  double z_budget = std::numeric_limits<double>::quiet_NaN();

  Index z_rows() const { return factors->cols() - factors->rank; }
  Index z_cols() const { return factors->rank; }
};

// Validates the combination: z_budget is required (finite, positive) for
// P21L1 and must be absent otherwise.
ReducedProblem build(ProblemKind kind, std::shared_ptr<const SvdFactors> factors,
                     std::optional<double> z_budget = std::nullopt);

// 2,1-norm objective, evaluated in the n x r reduced space where it equals
// norm_21 of the assembled H exactly.
double objective_p21(const SvdFactors& f, const Mat& z);

// Entrywise 1-norm objective of the assembled H.
double objective_p1(const SvdFactors& f, const Mat& z);

// Result of any solve over this family. H is always assembled through
// h_from_z, so the affine structure holds to rounding error.
struct Solution {
  Mat Z;
  Mat H;
  double objective = 0.0;
  SolveStatus status = SolveStatus::IterLimit;
  Index iterations = 0;
  double solve_time_s = 0.0;
  // Certified optimality gap when a dual bound was computed, else negative.
  double gap = -1.0;
  // For P21L1: max(0, norm21(H) - relaxed budget).
  double constraint_violation = 0.0;
  std::string solver_name;
};

}  // namespace ginv
