#pragma once

#include "dense.hpp"

namespace ginv {

// min c^T x  subject to  A x = b,  lower <= x <= upper.
// Bounds may be +-infinity. Redundant equality rows are tolerated.
struct LinearProgram {
  Mat A;
  Vec b;
  Vec c;
  Vec lower;
  Vec upper;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterLimit, Timeout };

struct LpResult {
  LpStatus status = LpStatus::IterLimit;
  Vec x;              // structural variables
  Vec y;              // equality-row multipliers, convention r_j = c_j - y^T a_j
  double objective = 0.0;
  Index iterations = 0;
  double infeasibility = 0.0;  // phase-1 objective at hand-off
};

struct SimplexOptions {
  double feas_tol = 1e-9;
  double opt_tol = 1e-9;
  double pivot_tol = 1e-9;
  Index max_iters = 0;        // 0 selects 200 * (rows + cols) + 10000
  Index refactor_every = 128;
  double time_cap_s = 0.0;    // <= 0 disables the deadline
};

// Bounded-variable revised two-phase simplex with an explicit basis inverse.
// Devex pricing with a permanent switch to Bland's rule after a long
// degenerate stall. Deterministic for fixed input.
LpResult solve_lp(const LinearProgram& lp, const SimplexOptions& opt = {});

}  // namespace ginv
