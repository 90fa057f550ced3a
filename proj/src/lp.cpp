#include "lp.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <vector>

#include "errors.hpp"

namespace ginv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool lp_log_enabled() {
  static const bool on = std::getenv("GINV_LP_LOG") != nullptr;
  return on;
}

enum class VarState : unsigned char { Basic, AtLower, AtUpper, Free };

// One simplex run over a fixed cost vector. The tableau is never formed;
// the basis inverse is kept explicitly and updated by elementary row
// operations, with periodic refactorization from scratch. Reduced costs
// are maintained incrementally and refreshed at every refactorization, and
// pricing uses devex reference weights, which matters a great deal on the
// heavily degenerate 1-norm programs this solver exists for.
class BoundedSimplex {
 public:
  BoundedSimplex(const LinearProgram& lp, const SimplexOptions& opt)
      : lp_(lp), opt_(opt), m_(lp.A.rows()), n_(lp.A.cols()) {
    total_ = n_ + m_;
    lb_.resize(total_);
    ub_.resize(total_);
    lb_.head(n_) = lp.lower;
    ub_.head(n_) = lp.upper;
    lb_.tail(m_).setZero();
    ub_.tail(m_).setConstant(kInf);
    cost_ = Vec::Zero(total_);
    state_.assign(static_cast<std::size_t>(total_), VarState::AtLower);
    banned_.assign(static_cast<std::size_t>(total_), 0);
    basis_.resize(static_cast<std::size_t>(m_));
    art_sign_ = Vec::Ones(m_);
    xb_ = Vec::Zero(m_);
    binv_ = Mat::Identity(m_, m_);
    red_ = Vec::Zero(total_);
    devex_ = Vec::Ones(total_);
    scratch_col_.resize(m_);
    alpha_.resize(total_);
    deadline_ = std::chrono::steady_clock::time_point::max();
    if (opt_.time_cap_s > 0.0) {
      deadline_ = std::chrono::steady_clock::now() +
                  std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                      std::chrono::duration<double>(opt_.time_cap_s));
    }
    max_iters_ = opt_.max_iters > 0 ? opt_.max_iters
                                    : 200 * (m_ + n_) + 10000;
  }

  LpResult run() {
    LpResult res;
    init_nonbasic_states();
    init_artificial_basis();
    crash_structural_basis();

    // Phase 1: minimize the artificial sum.
    cost_.setZero();
    cost_.tail(m_).setOnes();
    refresh();
    std::fill(banned_.begin(), banned_.end(), 0);
    bans_ = 0;
    LpStatus st = iterate();
    if (st == LpStatus::IterLimit || st == LpStatus::Timeout) {
      res.status = st;
      res.iterations = iters_;
      return res;
    }
    if (st == LpStatus::Unbounded) {
      throw Error(ErrorCode::Internal, "simplex: phase 1 unbounded");
    }
    if (lp_log_enabled()) {
      std::fprintf(stderr, "[lp] phase1 done: iters=%lld inf=%.3e bland=%d\n",
                   static_cast<long long>(iters_), phase1_objective(),
                   static_cast<int>(bland_));
    }
    const double scale = 1.0 + lp_.b.cwiseAbs().maxCoeff();
    res.infeasibility = phase1_objective();
    if (res.infeasibility > opt_.feas_tol * scale) {
      res.status = LpStatus::Infeasible;
      res.iterations = iters_;
      return res;
    }
    drive_out_artificials();

    // Phase 2: artificials pinned at zero, true costs on.
    ub_.tail(m_).setZero();
    cost_.setZero();
    cost_.head(n_) = lp_.c;
    devex_.setOnes();
    bland_ = false;
    degenerate_streak_ = 0;
    refresh();
    std::fill(banned_.begin(), banned_.end(), 0);
    bans_ = 0;
    st = iterate();
    res.iterations = iters_;
    if (lp_log_enabled()) {
      std::fprintf(stderr, "[lp] phase2 done: iters=%lld bland=%d st=%d\n",
                   static_cast<long long>(iters_), static_cast<int>(bland_),
                   static_cast<int>(st));
    }
    if (st == LpStatus::IterLimit || st == LpStatus::Timeout ||
        st == LpStatus::Unbounded) {
      res.status = st;
      if (st == LpStatus::Unbounded) return res;
    } else {
      res.status = LpStatus::Optimal;
    }

    refactor();
    recompute_xb();
    res.x = assemble_x();
    res.y = dual_values();
    res.objective = lp_.c.dot(res.x);
    return res;
  }

 private:
  void init_nonbasic_states() {
    for (Index j = 0; j < n_; ++j) {
      const double lo = lb_(j), hi = ub_(j);
      if (std::isinf(lo) && std::isinf(hi)) {
        state_[j] = VarState::Free;
      } else if (std::isinf(hi) || (!std::isinf(lo) && std::abs(lo) <= std::abs(hi))) {
        state_[j] = VarState::AtLower;
      } else {
        state_[j] = VarState::AtUpper;
      }
    }
  }

  double nonbasic_value(Index j) const {
    switch (state_[static_cast<std::size_t>(j)]) {
      case VarState::AtLower: return lb_(j);
      case VarState::AtUpper: return ub_(j);
      case VarState::Free: return 0.0;
      case VarState::Basic: break;
    }
    throw Error(ErrorCode::Internal, "simplex: basic variable queried as nonbasic");
  }

  void init_artificial_basis() {
    Vec resid = lp_.b;
    for (Index j = 0; j < n_; ++j) {
      const double v = nonbasic_value(j);
      if (v != 0.0) resid -= lp_.A.col(j) * v;
    }
    for (Index i = 0; i < m_; ++i) {
      art_sign_(i) = resid(i) >= 0.0 ? 1.0 : -1.0;
      basis_[static_cast<std::size_t>(i)] = n_ + i;
      state_[static_cast<std::size_t>(n_ + i)] = VarState::Basic;
      xb_(i) = std::abs(resid(i));
      binv_(i, i) = art_sign_(i);
    }
  }

  void column_of(Index j, Vec& out) const {
    if (j < n_) {
      out = lp_.A.col(j);
    } else {
      out.setZero();
      out(j - n_) = art_sign_(j - n_);
    }
  }

  double phase1_objective() const {
    double s = 0.0;
    for (Index i = 0; i < m_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] >= n_) s += xb_(i);
    }
    return s;
  }

  void refactor() {
    Mat b(m_, m_);
    Vec col(m_);
    for (Index i = 0; i < m_; ++i) {
      column_of(basis_[static_cast<std::size_t>(i)], col);
      b.col(i) = col;
    }
    Eigen::PartialPivLU<Mat> lu(b);
    binv_ = lu.inverse();
    if (!binv_.allFinite()) {
      if (lp_log_enabled()) {
        std::fprintf(stderr,
                     "[lp] singular basis: iters=%lld since_refactor=%lld "
                     "last_alpha=%.3e bland=%d\n",
                     static_cast<long long>(iters_),
                     static_cast<long long>(pivots_since_refactor_),
                     last_alpha_, static_cast<int>(bland_));
      }
      throw Error(ErrorCode::Internal, "simplex: singular basis");
    }
    pivots_since_refactor_ = 0;
  }

  void recompute_xb() {
    Vec w = lp_.b;
    for (Index j = 0; j < total_; ++j) {
      if (state_[static_cast<std::size_t>(j)] == VarState::Basic) continue;
      if (j >= n_) continue;  // nonbasic artificials sit at zero
      const double v = nonbasic_value(j);
      if (v != 0.0) w -= lp_.A.col(j) * v;
    }
    xb_ = binv_ * w;
  }

  Vec dual_values() const {
    Vec cb(m_);
    for (Index i = 0; i < m_; ++i) {
      cb(i) = cost_(basis_[static_cast<std::size_t>(i)]);
    }
    return binv_.transpose() * cb;
  }

  void recompute_reduced_costs() {
    const Vec y = dual_values();
    red_.head(n_) = cost_.head(n_) - lp_.A.transpose() * y;
    for (Index i = 0; i < m_; ++i) {
      red_(n_ + i) = cost_(n_ + i) - art_sign_(i) * y(i);
    }
    for (Index i = 0; i < m_; ++i) {
      red_(basis_[static_cast<std::size_t>(i)]) = 0.0;
    }
  }

  // Full recomputation of the basis inverse, values, and reduced costs.
  void refresh() {
    refactor();
    recompute_xb();
    recompute_reduced_costs();
    clean_ = true;
    ++refreshes_;
  }

  Vec assemble_x() const {
    Vec x(n_);
    for (Index j = 0; j < n_; ++j) {
      x(j) = state_[static_cast<std::size_t>(j)] == VarState::Basic
                 ? 0.0
                 : nonbasic_value(j);
    }
    for (Index i = 0; i < m_; ++i) {
      const Index v = basis_[static_cast<std::size_t>(i)];
      if (v < n_) x(v) = xb_(i);
    }
    return x;
  }

  // Entering candidate: index, direction, violation magnitude.
  struct Entering {
    Index j = -1;
    double dir = 0.0;
    double viol = 0.0;
  };

  Entering price() const {
    Entering best;
    double best_score = 0.0;
    for (Index j = 0; j < total_; ++j) {
      const auto st = state_[static_cast<std::size_t>(j)];
      if (st == VarState::Basic) continue;
      if (banned_[static_cast<std::size_t>(j)]) continue;
      if (ub_(j) - lb_(j) <= 0.0) continue;  // fixed, cannot move
      const double rj = red_(j);
      double dir = 0.0, viol = 0.0;
      if (st == VarState::AtLower && rj < -opt_.opt_tol) {
        dir = 1.0;
        viol = -rj;
      } else if (st == VarState::AtUpper && rj > opt_.opt_tol) {
        dir = -1.0;
        viol = rj;
      } else if (st == VarState::Free && std::abs(rj) > opt_.opt_tol) {
        dir = rj > 0.0 ? -1.0 : 1.0;
        viol = std::abs(rj);
      } else {
        continue;
      }
      if (bland_) return {j, dir, viol};
      const double score = viol * viol / devex_(j);
      if (score > best_score) {
        best_score = score;
        best = {j, dir, viol};
      }
    }
    return best;
  }

  // The pivot row in the full column space: alpha_j = (B^-1 A)_{p,j}.
  void pivot_row(Index p) {
    const Eigen::RowVectorXd rowp = binv_.row(p);
    alpha_.head(n_).noalias() = (rowp * lp_.A).transpose();
    for (Index i = 0; i < m_; ++i) {
      alpha_(n_ + i) = rowp(i) * art_sign_(i);
    }
  }

  Vec multiply_basis(const Vec& v) const {
    Vec out = Vec::Zero(m_);
    for (Index i = 0; i < m_; ++i) {
      const Index bv = basis_[static_cast<std::size_t>(i)];
      const double vi = v(i);
      if (vi == 0.0) continue;
      if (bv < n_) {
        out.noalias() += lp_.A.col(bv) * vi;
      } else {
        out(bv - n_) += art_sign_(bv - n_) * vi;
      }
    }
    return out;
  }

  // One step of iterative refinement on B d = a. The basis inverse drifts
  // under the rank-one row updates, and an unrefined d can show a spurious
  // nonzero pivot where the true value is zero, which would admit an
  // exactly singular basis.
  void ftran(const Vec& a, Vec& d) const {
    d.noalias() = binv_ * a;
    const Vec resid = a - multiply_basis(d);
    d.noalias() += binv_ * resid;
  }

  LpStatus iterate() {
    Vec d(m_);
    while (true) {
      if (iters_ >= max_iters_) return LpStatus::IterLimit;
      ++loops_;
      if ((loops_ & 63) == 0 &&
          std::chrono::steady_clock::now() > deadline_) {
        return LpStatus::Timeout;
      }
      if (lp_log_enabled() && (loops_ % 2000) == 0) {
        std::fprintf(stderr,
                     "[lp] progress: loops=%lld iters=%lld refreshes=%lld "
                     "bans=%lld flips=%lld p1obj=%.6e bland=%d\n",
                     static_cast<long long>(loops_),
                     static_cast<long long>(iters_),
                     static_cast<long long>(refreshes_),
                     static_cast<long long>(total_bans_),
                     static_cast<long long>(flips_), phase1_objective(),
                     static_cast<int>(bland_));
      }

      Entering ent = price();
      if (ent.j < 0) {
        // Confirm on fresh numbers before declaring optimality.
        if (clean_) return LpStatus::Optimal;
        refresh();
        ent = price();
        if (ent.j < 0) return LpStatus::Optimal;
      }

      column_of(ent.j, scratch_col_);
      ftran(scratch_col_, d);

      // Two-pass ratio test. The entering variable moves by dir * t >= 0;
      // basic variable i changes at rate delta_i = -dir * d_i. Pass one
      // finds the longest step every blocker tolerates with a small bound
      // slack; pass two takes the numerically strongest pivot within that
      // limit. Insisting on the exact minimum ratio would regularly force
      // pivots on near-zero entries, and those wreck the basis inverse.
      const double span = ub_(ent.j) - lb_(ent.j);
      const double slack = 1e-9;
      double t_limit = std::isinf(span) ? kInf : span;
      for (Index i = 0; i < m_; ++i) {
        const double delta = -ent.dir * d(i);
        if (std::abs(delta) <= opt_.pivot_tol) continue;
        const Index bv = basis_[static_cast<std::size_t>(i)];
        const double bound = delta < 0.0 ? lb_(bv) : ub_(bv);
        if (std::isinf(bound)) continue;
        double room = delta < 0.0 ? xb_(i) - bound : bound - xb_(i);
        if (room < 0.0) room = 0.0;
        const double t = (room + slack) / std::abs(delta);
        if (t < t_limit) t_limit = t;
      }

      Index leave_pos = -1;
      bool leave_at_upper = false;
      double best_pivot_mag = 0.0;
      double t_best = kInf;
      if (!std::isinf(t_limit)) {
        for (Index i = 0; i < m_; ++i) {
          const double delta = -ent.dir * d(i);
          if (std::abs(delta) <= opt_.pivot_tol) continue;
          const Index bv = basis_[static_cast<std::size_t>(i)];
          const double bound = delta < 0.0 ? lb_(bv) : ub_(bv);
          if (std::isinf(bound)) continue;
          double room = delta < 0.0 ? xb_(i) - bound : bound - xb_(i);
          if (room < 0.0) room = 0.0;
          const double t = room / std::abs(delta);
          if (t > t_limit) continue;
          const bool better =
              leave_pos < 0 ||
              (bland_ ? bv < basis_[static_cast<std::size_t>(leave_pos)]
                      : std::abs(delta) > best_pivot_mag);
          if (better) {
            leave_pos = i;
            leave_at_upper = delta > 0.0;
            best_pivot_mag = std::abs(delta);
            t_best = t;
          }
        }
        if (leave_pos < 0) t_best = span;  // only the entering bound binds
      } else if (!std::isinf(span)) {
        t_best = span;
      }

      // A surprising verdict against stale data is usually drift, not truth.
      // A missing blocker may hide behind an inexact direction, and a tiny
      // pivot may be pure noise over an exactly dependent column (the +/-
      // column pairs of 1-norm programs make that case real: it would put a
      // column and its negation in the basis together). Recompute everything
      // and retry; each retry leaves the state clean, so it cannot loop.
      if (!clean_ &&
          (std::isinf(t_best) ||
           (leave_pos >= 0 && std::abs(d(leave_pos)) < 1e-6))) {
        refresh();
        continue;
      }
      // Clean data and still no pivot worth taking: a faint violation means
      // the true blockers sit below the pivot tolerance, not that a ray
      // exists. Set the column aside rather than pivot on noise; bans lift
      // at the next basis change.
      if (std::isinf(t_best) ||
          (leave_pos >= 0 && std::abs(d(leave_pos)) < 1e-7)) {
        if (std::isinf(t_best) && ent.viol > 1e-5) return LpStatus::Unbounded;
        banned_[static_cast<std::size_t>(ent.j)] = 1;
        ++bans_;
        ++total_bans_;
        continue;
      }

      ++iters_;
      if (t_best <= 1e-12) {
        if (++degenerate_streak_ > 1000 && !bland_) {
          bland_ = true;
          refresh();
        }
      } else {
        degenerate_streak_ = 0;
      }

      if (leave_pos < 0) {
        // Bound flip: the entering variable runs to its other bound. The
        // basis does not change, so reduced costs stay valid.
        xb_ -= ent.dir * t_best * d;
        auto& st = state_[static_cast<std::size_t>(ent.j)];
        st = st == VarState::AtLower ? VarState::AtUpper : VarState::AtLower;
        clean_ = false;
        ++flips_;
        continue;
      }

      // Pivot: update values, basis, inverse, reduced costs, weights.
      if (bans_) {
        std::fill(banned_.begin(), banned_.end(), 0);
        bans_ = 0;
      }
      pivot_row(leave_pos);
      const double alpha_q = d(leave_pos);
      last_alpha_ = alpha_q;
      const double rq = red_(ent.j);
      const double wq = devex_(ent.j);

      xb_ -= ent.dir * t_best * d;
      const double enter_value = nonbasic_value(ent.j) + ent.dir * t_best;
      const Index leaving = basis_[static_cast<std::size_t>(leave_pos)];
      state_[static_cast<std::size_t>(leaving)] =
          leave_at_upper ? VarState::AtUpper : VarState::AtLower;
      basis_[static_cast<std::size_t>(leave_pos)] = ent.j;
      state_[static_cast<std::size_t>(ent.j)] = VarState::Basic;
      xb_(leave_pos) = enter_value;

      const double ratio = rq / alpha_q;
      const double weight_fac = wq / (alpha_q * alpha_q);
      double wmax = 1.0;
      for (Index j = 0; j < total_; ++j) {
        if (state_[static_cast<std::size_t>(j)] == VarState::Basic) continue;
        const double aj = alpha_(j);
        if (aj != 0.0) {
          red_(j) -= ratio * aj;
          const double cand = aj * aj * weight_fac;
          if (cand > devex_(j)) devex_(j) = cand;
          if (devex_(j) > wmax) wmax = devex_(j);
        }
      }
      red_(leaving) = -ratio;
      devex_(leaving) = std::max(weight_fac, 1.0);
      red_(ent.j) = 0.0;
      if (wmax > 1e8) devex_.setOnes();  // reference framework reset

      binv_.row(leave_pos) /= alpha_q;
      for (Index i = 0; i < m_; ++i) {
        if (i == leave_pos) continue;
        const double di = d(i);
        if (di != 0.0) binv_.row(i) -= di * binv_.row(leave_pos);
      }
      clean_ = false;
      // A pivot this small inflates every row of the inverse; rebuild
      // immediately instead of letting the damage compound.
      const bool shaky = std::abs(alpha_q) < 1e-6;
      if (shaky || ++pivots_since_refactor_ >= opt_.refactor_every) {
        refresh();
      }
    }
  }

  // Swap the best nonbasic structural column into basic position p. Only
  // valid while the basic variable at p sits exactly at zero, so the swap
  // is a degenerate pivot and no other basic value moves. Returns false
  // when no structural column has a usable pivot in that row.
  bool swap_in_structural(Index p, double score_floor) {
    const Eigen::RowVectorXd scores = binv_.row(p) * lp_.A;
    Index best_j = -1;
    double best_mag = score_floor;
    for (Index j = 0; j < n_; ++j) {
      if (state_[static_cast<std::size_t>(j)] == VarState::Basic) continue;
      const double mag = std::abs(scores(j));
      if (mag > best_mag) {
        best_mag = mag;
        best_j = j;
      }
    }
    if (best_j < 0) return false;
    column_of(best_j, scratch_col_);
    Vec d(m_);
    ftran(scratch_col_, d);
    if (std::abs(d(p)) < score_floor) return false;  // stale score
    const Index old = basis_[static_cast<std::size_t>(p)];
    state_[static_cast<std::size_t>(old)] = VarState::AtLower;
    basis_[static_cast<std::size_t>(p)] = best_j;
    const double entering_value = nonbasic_value(best_j);
    state_[static_cast<std::size_t>(best_j)] = VarState::Basic;
    const double dp = d(p);
    binv_.row(p) /= dp;
    for (Index i = 0; i < m_; ++i) {
      if (i == p) continue;
      const double di = d(i);
      if (di != 0.0) binv_.row(i) -= di * binv_.row(p);
    }
    xb_(p) = entering_value;
    if (++pivots_since_refactor_ >= opt_.refactor_every) {
      refactor();
      recompute_xb();
    }
    return true;
  }

  // Every zero row of b parks its artificial at value zero, and a start
  // basis made of those is one enormous degenerate vertex; phase 1 can
  // churn there forever without touching the objective. Swapping real
  // columns onto the zero rows first leaves phase 1 with only the genuine
  // infeasibility to repair.
  void crash_structural_basis() {
    for (Index p = 0; p < m_; ++p) {
      if (basis_[static_cast<std::size_t>(p)] < n_) continue;
      if (xb_(p) != 0.0) continue;
      swap_in_structural(p, 1e-3);
    }
    refresh();
  }

  // Pivot structural columns onto zero-valued basic artificials so phase 2
  // starts from a mostly structural basis. Rows where no structural column
  // has weight are redundant; their artificials stay basic at zero.
  void drive_out_artificials() {
    for (Index p = 0; p < m_; ++p) {
      if (basis_[static_cast<std::size_t>(p)] < n_) continue;
      swap_in_structural(p, 1e-6);
    }
    recompute_xb();
  }

  const LinearProgram& lp_;
  SimplexOptions opt_;
  Index m_, n_, total_;
  Vec lb_, ub_, cost_;
  std::vector<VarState> state_;
  std::vector<Index> basis_;
  Vec art_sign_;
  Vec xb_;
  Mat binv_;
  Vec red_;
  Vec devex_;
  Vec scratch_col_;
  Vec alpha_;
  std::vector<char> banned_;
  Index bans_ = 0;
  Index loops_ = 0;
  Index refreshes_ = 0;
  Index total_bans_ = 0;
  Index flips_ = 0;
  Index iters_ = 0;
  Index max_iters_ = 0;
  Index pivots_since_refactor_ = 0;
  Index degenerate_streak_ = 0;
  double last_alpha_ = 0.0;
  bool bland_ = false;
  bool clean_ = false;
  std::chrono::steady_clock::time_point deadline_;
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp, const SimplexOptions& opt) {
  const Index m = lp.A.rows();
  const Index n = lp.A.cols();
  if (lp.b.size() != m || lp.c.size() != n || lp.lower.size() != n ||
      lp.upper.size() != n) {
    throw Error(ErrorCode::Dimension, "solve_lp: vector sizes disagree with A");
  }
  require_finite(lp.A, "solve_lp: A");
  require_finite(lp.b, "solve_lp: b");
  if (!lp.c.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "solve_lp: c must be finite");
  }
  for (Index j = 0; j < n; ++j) {
    if (std::isnan(lp.lower(j)) || std::isnan(lp.upper(j))) {
      throw Error(ErrorCode::InvalidArgument, "solve_lp: NaN bound");
    }
    if (lp.lower(j) > lp.upper(j)) {
      LpResult r;
      r.status = LpStatus::Infeasible;
      return r;
    }
  }
  if (m == 0) {
    // Box problem: each variable sits at the bound favored by its cost.
    LpResult r;
    r.status = LpStatus::Optimal;
    r.x.resize(n);
    r.y.resize(0);
    for (Index j = 0; j < n; ++j) {
      if (lp.c(j) > 0.0) {
        r.x(j) = std::isinf(lp.lower(j)) ? 0.0 : lp.lower(j);
        if (std::isinf(lp.lower(j))) r.status = LpStatus::Unbounded;
      } else if (lp.c(j) < 0.0) {
        r.x(j) = std::isinf(lp.upper(j)) ? 0.0 : lp.upper(j);
        if (std::isinf(lp.upper(j))) r.status = LpStatus::Unbounded;
      } else {
        r.x(j) = std::isinf(lp.lower(j)) ? (std::isinf(lp.upper(j)) ? 0.0 : lp.upper(j))
                                         : lp.lower(j);
      }
    }
    r.objective = lp.c.dot(r.x);
    return r;
  }
  BoundedSimplex s(lp, opt);
  return s.run();
}

}  // namespace ginv
