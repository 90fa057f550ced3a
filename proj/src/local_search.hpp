#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dense.hpp"
#include "errors.hpp"

namespace ginv {

struct LsConfig {
  // A swap is accepted only when it multiplies |det| by more than kappa.
  // The default is a hair above 1 (plain local search); raising it to
  // something like 1.01 bounds the number of swaps polynomially.
  double kappa = 1.0 + 1e-10;
  Index max_swaps = 50000;
  // Cached inverse and ratio table are rebuilt from scratch this often.
  Index refresh_every = 50;
  unsigned seed = 0;  // reserved; the procedure itself is deterministic
  // Accepted swaps stream as CSV (iteration,j,k,ratio,absdet) to the file
  // and/or stream when set.
  std::string trace_path;
  std::ostream* trace_sink = nullptr;

  void validate() const;
};

// Search state: a row set, a column set, the square submatrix they cut out
// of A, and its cached inverse. log_absdet is the authoritative scale;
// absdet = exp(log_absdet) overflows to inf around r ~ 200 for generic
// matrices and is kept for reporting only.
struct LsState {
  std::vector<Index> rows;
  std::vector<Index> cols;
  Mat sub;
  Mat sub_inv;
  double absdet = 0.0;
  double log_absdet = 0.0;
  Index swaps = 0;
  SolveStatus status = SolveStatus::Optimal;
};

// r linearly independent row indices of A, chosen by pivoted factorization
// of A^T and reported in ascending order. Throws Error(Rank) when no row
// passes the pivot threshold.
std::vector<Index> select_rows(const Mat& a);

// r column indices making A[rows, cols] nonsingular, from a pivoted
// factorization of A[rows, :], ascending. Throws Error(Rank) if the row
// submatrix does not have full row rank.
std::vector<Index> initial_cols(const Mat& a, const std::vector<Index>& rows);

// Assembles sub, sub_inv and the determinant fields for given index sets.
// Throws Error(Rank) when the submatrix is singular.
LsState make_state(const Mat& a, std::vector<Index> rows,
                   std::vector<Index> cols);

// |det after replacing cols[j] by column k| / |det before|, evaluated from
// the cached inverse as |(sub_inv * A[rows, k])(j)|. Recomputing both
// determinants from scratch agrees to 1e-10 relative. k may repeat a
// column already in the set; swapping a column with itself gives 1.
double swap_ratio(const LsState& state, const Mat& a, Index j, Index k);

// Replaces cols[j] by column k, updating sub, sub_inv and the determinant
// by rank-one identities. Throws Error(Rank) when the swap would make the
// submatrix singular.
void apply_swap(LsState& state, const Mat& a, Index j, Index k);

// Best-improving swap search from an existing state: while some swap beats
// cfg.kappa, apply the one with the largest ratio (ties: smallest position,
// then smallest column). |det| grows strictly by a factor > kappa per
// accepted swap. status is IterLimit when max_swaps ran out with an
// improving swap still available.
void improve_state(LsState& state, const Mat& a, const LsConfig& cfg = {});

// select_rows + initial_cols + improve_state.
LsState local_search(const Mat& a, const LsConfig& cfg = {});

// The row-sparse inverse cut from a column set: H is n x m, zero outside
// rows `cols`, and those rows hold the least-squares inverse of A[:, cols].
// A H is then the orthogonal projector onto range(A), so H satisfies the
// generalized-inverse, reflexivity, and AH-symmetry properties with
// exactly r nonzero rows. Throws Error(Rank) when A[:, cols] is rank
// deficient.
Mat build_ah_symmetric(const Mat& a, const std::vector<Index>& cols);

}  // namespace ginv
