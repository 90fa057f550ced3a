#include "local_search.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <utility>

#include "tolerances.hpp"

namespace ginv {

namespace {

// Swap-trace writer, one row per accepted swap.
class SwapTrace {
 public:
  SwapTrace(const std::string& path, std::ostream* sink) : sink_(sink) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) {
        throw Error(ErrorCode::Io, "local_search: cannot open trace file " + path);
      }
    }
    if (active()) write_line("iteration,j,k,ratio,absdet");
  }

  bool active() const { return sink_ != nullptr || file_.is_open(); }

  void row(Index iter, Index j, Index k, double ratio, double absdet) {
    if (!active()) return;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%lld,%lld,%lld,%.17g,%.17g",
                  static_cast<long long>(iter), static_cast<long long>(j),
                  static_cast<long long>(k), ratio, absdet);
    write_line(buf);
  }

 private:
  void write_line(const char* s) {
    if (file_.is_open()) file_ << s << '\n';
    if (sink_) *sink_ << s << '\n';
  }

  std::ostream* sink_ = nullptr;
  std::ofstream file_;
};

Mat rows_of(const Mat& a, const std::vector<Index>& rows) {
  Mat out(static_cast<Index>(rows.size()), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Index>(i)) = a.row(rows[i]);
  }
  return out;
}

Vec subcolumn(const Mat& a, const std::vector<Index>& rows, Index k) {
  Vec out(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Index>(i)) = a(rows[i], k);
  return out;
}

double log_absdet_lu(const Mat& m, bool* singular) {
  Eigen::PartialPivLU<Mat> lu(m);
  double s = 0.0;
  *singular = false;
  for (Index i = 0; i < m.rows(); ++i) {
    const double d = std::abs(lu.matrixLU()(i, i));
    if (d == 0.0 || !std::isfinite(d)) {
      *singular = true;
      return 0.0;
    }
    s += std::log(d);
  }
  return s;
}

void check_indices(const Mat& a, const std::vector<Index>& rows,
                   const std::vector<Index>& cols) {
  if (rows.empty() || rows.size() != cols.size()) {
    throw Error(ErrorCode::Dimension,
                "local_search: row and column sets must be nonempty and equal length");
  }
  for (Index i : rows) {
    if (i < 0 || i >= a.rows()) {
      throw Error(ErrorCode::InvalidArgument, "local_search: row index out of range");
    }
  }
  for (Index j : cols) {
    if (j < 0 || j >= a.cols()) {
      throw Error(ErrorCode::InvalidArgument, "local_search: column index out of range");
    }
  }
}

}  // namespace

void LsConfig::validate() const {
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) {
    throw Error(ErrorCode::Config, "kappa must be finite and >= 1");
  }
  if (max_swaps < 0) {
    throw Error(ErrorCode::Config, "max_swaps must be nonnegative");
  }
  if (refresh_every < 1) {
    throw Error(ErrorCode::Config, "refresh_every must be >= 1");
  }
}

std::vector<Index> select_rows(const Mat& a) {
  require_finite(a, "select_rows: input");
  Eigen::ColPivHouseholderQR<Mat> qr(a.transpose());
  const Mat& rmat = qr.matrixR();
  const double top = std::abs(rmat(0, 0));
  if (top == 0.0) {
    throw Error(ErrorCode::Rank, "select_rows: matrix is zero");
  }
  const double cutoff =
      ToleranceConfig{}.effective_rank_tol(a.rows(), a.cols()) * top;
  const Index kmax = std::min(a.rows(), a.cols());
  Index r = 0;
  while (r < kmax && std::abs(rmat(r, r)) > cutoff) ++r;
  if (r == 0) {
    throw Error(ErrorCode::Rank, "select_rows: no independent rows found");
  }
  const auto& perm = qr.colsPermutation().indices();
  std::vector<Index> rows(static_cast<std::size_t>(r));
  for (Index i = 0; i < r; ++i) rows[static_cast<std::size_t>(i)] = perm(i);
  std::sort(rows.begin(), rows.end());
  return rows;
}

std::vector<Index> initial_cols(const Mat& a, const std::vector<Index>& rows) {
  const Index r = static_cast<Index>(rows.size());
  const Mat as = rows_of(a, rows);
  Eigen::ColPivHouseholderQR<Mat> qr(as);
  const Mat& rmat = qr.matrixR();
  const double top = std::abs(rmat(0, 0));
  const double cutoff =
      ToleranceConfig{}.effective_rank_tol(as.rows(), as.cols()) * top;
  if (top == 0.0 || r > std::min(as.rows(), as.cols()) ||
      std::abs(rmat(r - 1, r - 1)) <= cutoff) {
    throw Error(ErrorCode::Rank, "initial_cols: row submatrix is rank deficient");
  }
  const auto& perm = qr.colsPermutation().indices();
  std::vector<Index> cols(static_cast<std::size_t>(r));
  for (Index i = 0; i < r; ++i) cols[static_cast<std::size_t>(i)] = perm(i);
  std::sort(cols.begin(), cols.end());
  return cols;
}

LsState make_state(const Mat& a, std::vector<Index> rows,
                   std::vector<Index> cols) {
  require_finite(a, "make_state: input");
  check_indices(a, rows, cols);
  const Index r = static_cast<Index>(rows.size());
  LsState st;
  st.rows = std::move(rows);
  st.cols = std::move(cols);
  st.sub.resize(r, r);
  for (Index i = 0; i < r; ++i) {
    for (Index j = 0; j < r; ++j) {
      st.sub(i, j) = a(st.rows[static_cast<std::size_t>(i)],
                       st.cols[static_cast<std::size_t>(j)]);
    }
  }
  bool singular = false;
  st.log_absdet = log_absdet_lu(st.sub, &singular);
  if (singular) {
    throw Error(ErrorCode::Rank, "make_state: submatrix is singular");
  }
  st.sub_inv = st.sub.partialPivLu().inverse();
  if (!st.sub_inv.allFinite()) {
    throw Error(ErrorCode::Rank, "make_state: submatrix inverse overflowed");
  }
  st.absdet = std::exp(st.log_absdet);
  return st;
}

double swap_ratio(const LsState& state, const Mat& a, Index j, Index k) {
  const Index r = static_cast<Index>(state.cols.size());
  if (j < 0 || j >= r) {
    throw Error(ErrorCode::InvalidArgument, "swap_ratio: position out of range");
  }
  if (k < 0 || k >= a.cols()) {
    throw Error(ErrorCode::InvalidArgument, "swap_ratio: column out of range");
  }
  const Vec w = state.sub_inv * subcolumn(a, state.rows, k);
  return std::abs(w(j));
}

void apply_swap(LsState& state, const Mat& a, Index j, Index k) {
  const Index r = static_cast<Index>(state.cols.size());
  if (j < 0 || j >= r || k < 0 || k >= a.cols()) {
    throw Error(ErrorCode::InvalidArgument, "apply_swap: index out of range");
  }
  const Vec col = subcolumn(a, state.rows, k);
  const Vec w = state.sub_inv * col;
  const double piv = w(j);
  if (piv == 0.0 || !std::isfinite(piv)) {
    throw Error(ErrorCode::Rank, "apply_swap: swap makes the submatrix singular");
  }
  // New inverse = E^-1 * old inverse, where E is the identity with column j
  // replaced by w. E^-1 differs from I only in column j, so the update is
  // one scaled-row correction.
  const Eigen::RowVectorXd pivot_row = state.sub_inv.row(j) / piv;
  state.sub_inv -= (w - Vec::Unit(r, j)) * pivot_row;
  state.sub_inv.row(j) = pivot_row;
  state.sub.col(j) = col;
  state.cols[static_cast<std::size_t>(j)] = k;
  state.log_absdet += std::log(std::abs(piv));
  state.absdet = std::exp(state.log_absdet);
}

void improve_state(LsState& state, const Mat& a, const LsConfig& cfg) {
  cfg.validate();
  const Index r = static_cast<Index>(state.cols.size());
  const Index n = a.cols();
  SwapTrace trace(cfg.trace_path, cfg.trace_sink);

  std::vector<char> in_set(static_cast<std::size_t>(n), 0);
  for (Index c : state.cols) in_set[static_cast<std::size_t>(c)] = 1;

  // ratios(j, k) = |det after swapping position j to column k| / |det now|.
  Mat ratios = state.sub_inv * rows_of(a, state.rows);
  Index since_refresh = 0;
  state.status = SolveStatus::Optimal;

  while (true) {
    Index best_j = -1, best_k = -1;
    double best = cfg.kappa;
    for (Index j = 0; j < r; ++j) {
      for (Index k = 0; k < n; ++k) {
        if (in_set[static_cast<std::size_t>(k)]) continue;
        const double v = std::abs(ratios(j, k));
        if (v > best) {
          best = v;
          best_j = j;
          best_k = k;
        }
      }
    }
    if (best_j < 0) return;  // local maximizer at factor kappa
    if (state.swaps >= cfg.max_swaps) {
      state.status = SolveStatus::IterLimit;
      return;
    }

    const Index old_col = state.cols[static_cast<std::size_t>(best_j)];
    const Vec w = ratios.col(best_k);
    apply_swap(state, a, best_j, best_k);
    in_set[static_cast<std::size_t>(old_col)] = 0;
    in_set[static_cast<std::size_t>(best_k)] = 1;
    ++state.swaps;
    trace.row(state.swaps, best_j, best_k, best, state.absdet);

    if (++since_refresh >= cfg.refresh_every) {
      // Contain drift: rebuild the inverse and the ratio table exactly.
      LsState fresh = make_state(a, state.rows, state.cols);
      fresh.swaps = state.swaps;
      fresh.status = state.status;
      state = std::move(fresh);
      ratios = state.sub_inv * rows_of(a, state.rows);
      since_refresh = 0;
    } else {
      // Same rank-one identity as the inverse update, applied to all
      // candidate columns at once.
      const Eigen::RowVectorXd pivot_row = ratios.row(best_j) / w(best_j);
      ratios -= (w - Vec::Unit(r, best_j)) * pivot_row;
      ratios.row(best_j) = pivot_row;
    }
  }
}

LsState local_search(const Mat& a, const LsConfig& cfg) {
  cfg.validate();
  auto rows = select_rows(a);
  auto cols = initial_cols(a, rows);
  LsState state = make_state(a, std::move(rows), std::move(cols));
  improve_state(state, a, cfg);
  return state;
}

Mat build_ah_symmetric(const Mat& a, const std::vector<Index>& cols) {
  require_finite(a, "build_ah_symmetric: input");
  const Index r = static_cast<Index>(cols.size());
  if (r < 1 || r > std::min(a.rows(), a.cols())) {
    throw Error(ErrorCode::Dimension, "build_ah_symmetric: bad column count");
  }
  for (Index c : cols) {
    if (c < 0 || c >= a.cols()) {
      throw Error(ErrorCode::InvalidArgument,
                  "build_ah_symmetric: column index out of range");
    }
  }
  Mat ahat(a.rows(), r);
  for (Index j = 0; j < r; ++j) ahat.col(j) = a.col(cols[static_cast<std::size_t>(j)]);
  const Mat gram = ahat.transpose() * ahat;
  Eigen::LLT<Mat> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::Rank, "build_ah_symmetric: selected columns are rank deficient");
  }
  const Mat rows_t = llt.solve(ahat.transpose());
  if (!rows_t.allFinite()) {
    throw Error(ErrorCode::Rank, "build_ah_symmetric: least-squares rows overflowed");
  }
  Mat h = Mat::Zero(a.cols(), a.rows());
  for (Index j = 0; j < r; ++j) {
    h.row(cols[static_cast<std::size_t>(j)]) = rows_t.row(j);
  }
  return h;
}

}  // namespace ginv
