#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "reduced.hpp"
#include "tolerances.hpp"

namespace ginv {

struct SolverTraceRow {
  Index iter;
  double objective;
  double merit;  // fixed-point residual of the splitting iteration
};

struct SolverConfig {
  Index max_iters = 100000;
  double solver_tol = 1e-8;    // relative optimality-gap target
  double gamma_scale = 1.0;    // multiplies the automatic proximal step
  double relaxation = 1.7;     // splitting relaxation, must lie in (0, 2)
  double budget_delta = 1e-8;  // P21L1 budget is enlarged to budget*(1+delta)
  std::uint64_t seed = 0;      // reserved; the deterministic paths ignore it
  double time_cap_s = 0.0;     // <= 0 disables the deadline
  Index lp_size_cap = 2500;    // P123 runs the LP route while n*m + dim(Z) <= cap
  Index full_cap = 2000;       // solve_p123_full refuses n*m above this
  std::string trace_path;      // per-iteration CSV when nonempty
  std::vector<SolverTraceRow>* trace_sink = nullptr;

  void validate() const;
};

// Row-sparse solve: minimizes the 2,1-norm over the structured family.
// Splitting iteration with a support-identification polish step and a dual
// bound; status is Optimal only when the certified gap meets solver_tol.
Solution solve_p21(const ReducedProblem& problem, const SolverConfig& cfg = {});

// Entrywise solve: minimizes the 1-norm over the structured family. Small
// problems go through an exact LP (solved in dual form, whose basis has only
// dim(Z) rows); large ones through the splitting iteration.
Solution solve_p123(const ReducedProblem& problem, const SolverConfig& cfg = {});

// Budgeted solve: minimizes the 1-norm subject to the 2,1-norm staying
// within z_budget*(1+delta). The internal P21 solution is always admitted
// as a candidate, so the returned 1-norm never exceeds that H's.
Solution solve_p21_l1(const ReducedProblem& problem, const SolverConfig& cfg = {});

// Independent cross-check: solves min ||H||_1 subject to A H A = A and
// (A H)^T = A H imposed directly on the n*m entries of H, without the SVD
// reduction. Reflexivity is verified after the fact and a violation throws.
// Z is left empty; only H and the objective are meaningful.
Solution solve_p123_full(const Mat& a, const SolverConfig& cfg = {});

// Column-sparse variant: runs the row solve on A^T and transposes back.
// The result satisfies P1, P2 and P4 instead of P1, P2, P3.
Solution column_variant(const Mat& a, const SolverConfig& cfg = {},
                        const ToleranceConfig& tol = {});

struct OracleGrid {
  double lo = -10.0;
  double hi = 10.0;
  Index coarse_1d = 2001;
  Index coarse_2d = 201;
  Index refine_rounds = 6;
  Index refine_points = 41;
};

// Exhaustive grid plus local refinement over the scalar entries of Z.
// Only valid while Z has at most two entries; certifies solvers to about
// 1e-4 absolute on desk-size instances.
double oracle_small(const ReducedProblem& problem, const OracleGrid& grid = {});

// n*m x dim(Z) matrix K with vec(h_from_z(F, Z)) = vec(G) + K vec(Z),
// both vectorizations row-major.
Mat structured_basis(const SvdFactors& f);

}  // namespace ginv
