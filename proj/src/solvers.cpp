#include "solvers.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include "lp.hpp"
#include "mtx_io.hpp"
#include "splitting.hpp"

namespace ginv {

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kInf = std::numeric_limits<double>::infinity();

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

class Deadline {
 public:
  Deadline(double cap_s, Clock::time_point t0) : active_(cap_s > 0.0) {
    if (active_) {
      end_ = t0 + std::chrono::duration_cast<Clock::duration>(
                      std::chrono::duration<double>(cap_s));
    }
  }

  bool expired() const { return active_ && Clock::now() > end_; }

  // Remaining seconds, or 0 when no deadline is set.
  double remaining_s() const {
    if (!active_) return 0.0;
    const double rem = std::chrono::duration<double>(end_ - Clock::now()).count();
    return std::max(rem, 1e-3);
  }

 private:
  bool active_;
  Clock::time_point end_;
};

class Tracer {
 public:
  explicit Tracer(const SolverConfig& cfg) : sink_(cfg.trace_sink) {
    if (!cfg.trace_path.empty()) {
      file_.open(cfg.trace_path);
      if (!file_) {
        throw Error(ErrorCode::Io,
                    "trace: cannot open '" + cfg.trace_path + "'");
      }
      file_ << "iter,objective,residual\n";
    }
  }

  void record(Index iter, double objective, double merit) {
    if (sink_) sink_->push_back({iter, objective, merit});
    if (file_.is_open()) {
      file_ << iter << "," << format_value(objective) << ","
            << format_value(merit) << "\n";
    }
  }

 private:
  std::vector<SolverTraceRow>* sink_;
  std::ofstream file_;
};

// ---------------------------------------------------------------------------
// Row-support polish for the 2,1 solve.
//
// With the support S fixed and rows off S pinned to zero, the problem
//   min sum_{i in S} ||M_i||_2   s.t.  V1[S]^T M_S = Dinv
// is smooth wherever no row vanishes. M_S is parameterized as P + N Q with
// V1[S]^T N = 0, and Q is found by a damped Newton method. The result is
// exactly feasible, which makes it a valid upper bound.
// ---------------------------------------------------------------------------

struct PolishResult {
  bool ok = false;
  Mat m;             // n x r, zero off the support
  double objective = kInf;
};

double rowsum_norm(const Mat& a) { return a.rowwise().norm().sum(); }

PolishResult polish_rows(const Mat& v1, const Vec& dinv,
                         std::vector<Index> support, const Mat& warm,
                         int depth = 0) {
  PolishResult out;
  const Index n = v1.rows();
  const Index r = v1.cols();
  const Index s = static_cast<Index>(support.size());
  if (s < r || depth > 3) return out;

  Mat v1s(s, r);
  Mat warm_s(s, r);
  for (Index i = 0; i < s; ++i) {
    v1s.row(i) = v1.row(support[static_cast<std::size_t>(i)]);
    warm_s.row(i) = warm.row(support[static_cast<std::size_t>(i)]);
  }

  Eigen::ColPivHouseholderQR<Mat> rank_check(v1s);
  rank_check.setThreshold(1e-12);
  if (rank_check.rank() < r) return out;

  const Mat gram = v1s.transpose() * v1s;
  Eigen::LLT<Mat> gram_llt(gram);
  if (gram_llt.info() != Eigen::Success) return out;
  Mat dinv_mat = Mat::Zero(r, r);
  dinv_mat.diagonal() = dinv;
  const Mat part = v1s * gram_llt.solve(dinv_mat);  // particular solution

  const Index k = s - r;
  Mat rows;  // s x r current point
  if (k == 0) {
    rows = part;
  } else {
    Eigen::HouseholderQR<Mat> qr(v1s);
    const Mat qfull = qr.householderQ() * Mat::Identity(s, s);
    const Mat nmat = qfull.rightCols(k);  // orthonormal, V1[S]^T N = 0

    Mat q = nmat.transpose() * (warm_s - part);  // k x r warm start
    double fcur = rowsum_norm(part + nmat * q);
    const Index dim = k * r;

    for (int newton = 0; newton < 60; ++newton) {
      rows = part + nmat * q;
      Vec rho = rows.rowwise().norm();
      const double rho_max = rho.maxCoeff();
      // A vanishing row means the support is too large; retry without it.
      for (Index i = 0; i < s; ++i) {
        if (rho(i) < 1e-12 * (1.0 + rho_max)) {
          std::vector<Index> smaller;
          for (Index t = 0; t < s; ++t) {
            if (t != i) smaller.push_back(support[static_cast<std::size_t>(t)]);
          }
          return polish_rows(v1, dinv, std::move(smaller), warm, depth + 1);
        }
      }

      Mat unit = rows.array().colwise() / rho.array();  // s x r
      Mat grad = nmat.transpose() * unit;               // k x r
      const double gnorm = grad.norm();
      fcur = rho.sum();
      if (gnorm <= 1e-13 * (1.0 + fcur)) break;

      // Hessian in the row-major flattening q_vec(a*r+b) = Q(a,b):
      // sum_i (w_i^T w_i) (x) (I - u_i^T u_i) / rho_i.
      Mat hess = Mat::Zero(dim, dim);
      Mat block(r, r);
      for (Index i = 0; i < s; ++i) {
        block = Mat::Identity(r, r);
        block.noalias() -= unit.row(i).transpose() * unit.row(i);
        block /= rho(i);
        for (Index a = 0; a < k; ++a) {
          const double wa = nmat(i, a);
          if (wa == 0.0) continue;
          for (Index b = 0; b < k; ++b) {
            const double w = wa * nmat(i, b);
            if (w != 0.0) hess.block(a * r, b * r, r, r) += w * block;
          }
        }
      }
      const double mu = std::max(1e-14, 1e-10 * hess.trace() / dim);
      hess.diagonal().array() += mu;

      Vec gvec(dim);
      for (Index a = 0; a < k; ++a) {
        gvec.segment(a * r, r) = grad.row(a).transpose();
      }
      const Vec dvec = Eigen::LDLT<Mat>(hess).solve(-gvec);
      Mat step(k, r);
      for (Index a = 0; a < k; ++a) {
        step.row(a) = dvec.segment(a * r, r).transpose();
      }
      double slope = (grad.array() * step.array()).sum();
      if (!(slope < 0.0)) {
        step = -grad;
        slope = -gnorm * gnorm;
      }

      double t = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 45; ++ls) {
        const double ftrial = rowsum_norm(part + nmat * (q + t * step));
        if (ftrial <= fcur + 1e-4 * t * slope) {
          q += t * step;
          moved = true;
          break;
        }
        t *= 0.5;
      }
      if (!moved) break;
    }
    rows = part + nmat * q;
  }

  out.ok = true;
  out.m = Mat::Zero(n, r);
  for (Index i = 0; i < s; ++i) {
    out.m.row(support[static_cast<std::size_t>(i)]) = rows.row(i);
  }
  out.objective = rowsum_norm(out.m);
  return out;
}

// Lower bound from the dual max <Dinv, L> s.t. ||(V1 L)_i||_2 <= 1 for all
// rows i. L is fitted to the normalized rows of the candidate and scaled
// into the feasible region, so the bound is valid regardless of how good
// the candidate is.
double dual_bound_p21(const Mat& v1, const Vec& dinv, const Mat& m) {
  const Index n = v1.rows();
  const Index r = v1.cols();
  Vec rho = m.rowwise().norm();
  const double rho_max = rho.maxCoeff();
  if (rho_max <= 0.0) return 0.0;

  std::vector<Index> sup;
  for (Index i = 0; i < n; ++i) {
    if (rho(i) > 1e-10 * rho_max) sup.push_back(i);
  }
  const Index s = static_cast<Index>(sup.size());
  Mat v1s(s, r), units(s, r);
  for (Index i = 0; i < s; ++i) {
    const Index row = sup[static_cast<std::size_t>(i)];
    v1s.row(i) = v1.row(row);
    units.row(i) = m.row(row) / rho(row);
  }

  Eigen::ColPivHouseholderQR<Mat> qr(v1s);
  Mat lambda = qr.solve(units);  // least-squares fit of the multipliers

  Vec lens = (v1 * lambda).rowwise().norm();
  const double smax = lens.maxCoeff();
  if (smax > 1.0) lambda /= smax;
  return dinv.dot(lambda.diagonal());
}

Vec vec_row_major(const Mat& a) {
  Vec v(a.size());
  const Index m = a.cols();
  for (Index i = 0; i < a.rows(); ++i) {
    v.segment(i * m, m) = a.row(i).transpose();
  }
  return v;
}

double remaining_cap(const SolverConfig& cfg, const Deadline& dl) {
  return cfg.time_cap_s > 0.0 ? dl.remaining_s() : 0.0;
}

Solution closed_form_solution(const ReducedProblem& problem, const char* name,
                              Clock::time_point t0) {
  const SvdFactors& f = *problem.factors;
  Solution sol;
  sol.Z = Mat::Zero(f.cols() - f.rank, f.rank);
  sol.H = h_from_z(f, sol.Z);
  sol.objective = problem.kind == ProblemKind::P21 ? objective_p21(f, sol.Z)
                                                   : objective_p1(f, sol.Z);
  sol.status = SolveStatus::Optimal;
  sol.gap = 0.0;
  sol.iterations = 0;
  sol.solver_name = name;
  sol.solve_time_s = seconds_since(t0);
  return sol;
}

}  // namespace

void SolverConfig::validate() const {
  if (max_iters <= 0) {
    throw Error(ErrorCode::Config, "SolverConfig: max_iters must be positive");
  }
  if (!(solver_tol > 0.0) || !std::isfinite(solver_tol)) {
    throw Error(ErrorCode::Config, "SolverConfig: solver_tol must be positive");
  }
  if (!(gamma_scale > 0.0) || !std::isfinite(gamma_scale)) {
    throw Error(ErrorCode::Config, "SolverConfig: gamma_scale must be positive");
  }
  if (!(relaxation > 0.0) || !(relaxation < 2.0)) {
    throw Error(ErrorCode::Config,
                "SolverConfig: relaxation must lie in (0, 2)");
  }
  if (!(budget_delta >= 0.0) || !std::isfinite(budget_delta)) {
    throw Error(ErrorCode::Config,
                "SolverConfig: budget_delta must be nonnegative");
  }
  if (lp_size_cap < 0 || full_cap <= 0) {
    throw Error(ErrorCode::Config, "SolverConfig: size caps must be positive");
  }
}

Mat structured_basis(const SvdFactors& f) {
  const Index n = f.cols();
  const Index m = f.rows();
  const Index r = f.rank;
  const Index zr = n - r;
  const Mat v2 = f.V2();
  const Mat u1 = f.U1();
  Mat k(n * m, zr * r);
  for (Index a = 0; a < zr; ++a) {
    for (Index b = 0; b < r; ++b) {
      const Index col = a * r + b;
      for (Index i = 0; i < n; ++i) {
        const double va = v2(i, a);
        for (Index j = 0; j < m; ++j) {
          k(i * m + j, col) = va * u1(j, b);
        }
      }
    }
  }
  return k;
}

Solution solve_p21(const ReducedProblem& problem, const SolverConfig& cfg) {
  cfg.validate();
  if (problem.kind != ProblemKind::P21) {
    throw Error(ErrorCode::Config, "solve_p21: problem kind must be P21");
  }
  const auto t0 = Clock::now();
  const SvdFactors& f = *problem.factors;
  const Index n = f.cols();
  const Index r = f.rank;
  const Index zr = n - r;

  if (zr == 0) return closed_form_solution(problem, "p21_closed_form", t0);

  const Mat v1 = f.V1();
  const Mat v2 = f.V2();
  const Vec dinv = f.dinv();
  const Mat m0 = v1 * dinv.asDiagonal();

  Tracer trace(cfg);
  const Deadline dl(cfg.time_cap_s, t0);

  const double lambda = cfg.relaxation;
  const double gamma = cfg.gamma_scale * 0.5 * rowsum_norm(m0) / n;

  Mat z = m0;  // corresponds to Z = 0
  Mat x(n, r), y(n, r), diff(n, r), vtz(r, r);

  double best_obj = kInf;
  Mat best_m;
  double best_pol_obj = kInf;
  Mat best_pol_m;
  double best_bound = 0.0;  // L = 0 is always dual feasible
  std::vector<Index> last_support;
  bool polished_once = false;
  Index last_progress = 0;

  const Index check_every = 50;
  Index iters_done = 0;
  for (Index it = 1; it <= cfg.max_iters; ++it) {
    iters_done = it;
    vtz.noalias() = v1.transpose() * z;
    vtz.diagonal() -= dinv;
    x = z;
    x.noalias() -= v1 * vtz;
    const double obj_x = rowsum_norm(x);
    if (obj_x < best_obj - 1e-12 * (1.0 + best_obj)) last_progress = it;
    if (obj_x < best_obj) {
      best_obj = obj_x;
      best_m = x;
    }
    y = 2.0 * x - z;
    row_shrink(y, gamma);
    diff = y - x;
    z += lambda * diff;
    const double merit = lambda * diff.norm();
    trace.record(it, obj_x, merit);

    const bool stalled = merit <= 1e-14 * (1.0 + z.norm());
    if (it % check_every == 0 || stalled || it == cfg.max_iters) {
      std::vector<Index> support;
      for (Index i = 0; i < n; ++i) {
        if (y.row(i).squaredNorm() > 0.0) support.push_back(i);
      }
      if (!polished_once || support != last_support) {
        polished_once = true;
        last_support = support;
        PolishResult pol = polish_rows(v1, dinv, support, y);
        if (pol.ok) {
          if (pol.objective < best_pol_obj - 1e-12 * (1.0 + best_pol_obj)) {
            last_progress = it;
          }
          if (pol.objective < best_pol_obj) {
            best_pol_obj = pol.objective;
            best_pol_m = pol.m;
          }
          const double bd = dual_bound_p21(v1, dinv, pol.m);
          if (bd > best_bound + 1e-12 * (1.0 + std::abs(bd))) {
            last_progress = it;
          }
          best_bound = std::max(best_bound, bd);
        }
      }
      const double f_best = std::min(best_obj, best_pol_obj);
      if (f_best - best_bound <= cfg.solver_tol * (1.0 + std::abs(f_best))) {
        break;
      }
      if (stalled || dl.expired()) break;
      if (it - last_progress > 5000) break;
    }
  }

  const Mat& m_final = best_pol_obj <= best_obj ? best_pol_m : best_m;
  Solution sol;
  sol.Z = v2.transpose() * m_final;
  sol.H = h_from_z(f, sol.Z);
  sol.objective = objective_p21(f, sol.Z);
  sol.gap = std::max(0.0, sol.objective - best_bound);
  sol.iterations = iters_done;
  sol.status = sol.gap <= cfg.solver_tol * (1.0 + std::abs(sol.objective))
                   ? SolveStatus::Optimal
                   : SolveStatus::IterLimit;
  sol.solver_name = "p21_splitting";
  sol.solve_time_s = seconds_since(t0);
  return sol;
}

namespace {

// Splitting fallback for the entrywise problem; used when the instance is
// too large for the LP route (or if that route failed to certify).
Solution p123_splitting(const ReducedProblem& problem, const SolverConfig& cfg,
                        Clock::time_point t0) {
  const SvdFactors& f = *problem.factors;
  const Index n = f.cols();
  const Index m = f.rows();
  const Index r = f.rank;
  const Index zr = n - r;
  const Index nm = n * m;
  const Index d = zr * r;

  const Mat v2 = f.V2();
  const Mat u1 = f.U1();
  const Mat& g = f.G;

  Tracer trace(cfg);
  const Deadline dl(cfg.time_cap_s, t0);

  // The explicit basis is only materialized when affordable; it powers the
  // zero-set polish and the dual bound. Its columns are orthonormal (they
  // are outer products of orthonormal V2 and U1 columns), so K^T K = I and
  // projections onto its range need no factorization.
  const bool with_basis = nm * d <= 25000000;
  Mat kbasis;
  Vec gvec, ktg;
  if (with_basis) {
    kbasis = structured_basis(f);
    gvec = vec_row_major(g);
    ktg = kbasis.transpose() * gvec;
  }

  const double lambda = cfg.relaxation;
  const double gamma = cfg.gamma_scale * 0.5 * norm_1(g) / nm;

  Mat z = g;  // Z = 0 start
  Mat x(n, m), y(n, m), diff(n, m);

  double best_obj = kInf;
  Mat best_x;
  double best_pol_obj = kInf;
  Mat best_pol_z;
  bool have_pol = false;
  double best_bound = 0.0;
  std::vector<Index> last_zeroset;
  Index last_polish = -1;
  Index last_progress = 0;

  // Zero-set polish: solve the equality-constrained least squares
  // (g + K z) = 0 on the zero set, exploiting K^T K = I. The Gram matrix
  // of the selected rows is accumulated over whichever of the zero set or
  // its complement is smaller.
  auto polish = [&](const std::vector<Index>& zeroset, Index it,
                    Index size_mult) {
    const Index zs = static_cast<Index>(zeroset.size());
    if (zs < d || zs > size_mult * d) return;
    last_polish = it;
    Mat bmat;
    Vec rhs(d);
    if (zs <= nm - zs) {
      bmat = Mat::Zero(d, d);
      rhs.setZero();
      for (const Index kidx : zeroset) {
        bmat.selfadjointView<Eigen::Lower>().rankUpdate(
            kbasis.row(kidx).transpose(), 1.0);
        rhs.noalias() -= kbasis.row(kidx).transpose() * gvec(kidx);
      }
    } else {
      bmat = Mat::Identity(d, d);
      rhs = -ktg;
      std::vector<char> in_zero(static_cast<std::size_t>(nm), 0);
      for (const Index kidx : zeroset) {
        in_zero[static_cast<std::size_t>(kidx)] = 1;
      }
      for (Index kidx = 0; kidx < nm; ++kidx) {
        if (in_zero[static_cast<std::size_t>(kidx)]) continue;
        bmat.selfadjointView<Eigen::Lower>().rankUpdate(
            kbasis.row(kidx).transpose(), -1.0);
        rhs.noalias() += kbasis.row(kidx).transpose() * gvec(kidx);
      }
    }
    const Eigen::LDLT<Mat> ldlt(bmat.selfadjointView<Eigen::Lower>());
    if (ldlt.info() != Eigen::Success) return;
    const Vec zfit = ldlt.solve(rhs);
    if (!zfit.allFinite()) return;
    Mat zmat(zr, r);
    for (Index a = 0; a < zr; ++a) {
      zmat.row(a) = zfit.segment(a * r, r).transpose();
    }
    const double obj_pol = objective_p1(f, zmat);
    if (obj_pol < best_pol_obj - 1e-12 * (1.0 + best_pol_obj)) {
      last_progress = it;
    }
    if (obj_pol < best_pol_obj) {
      best_pol_obj = obj_pol;
      best_pol_z = zmat;
      have_pol = true;
    }
  };

  // Dual bound: project the sign pattern of the best iterate onto the
  // orthogonal complement of the structured directions, scale into the
  // unit box; g^T w is then a valid lower bound on the optimal value.
  auto update_bound = [&](Index it) {
    Vec y0(nm);
    if (have_pol && best_pol_obj <= best_obj) {
      y0 = vec_row_major(h_from_z(f, best_pol_z));
    } else {
      y0 = vec_row_major(best_x);
    }
    for (Index t = 0; t < nm; ++t) {
      const double v = y0(t);
      y0(t) = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
    }
    Vec w = y0;
    w.noalias() -= kbasis * (kbasis.transpose() * y0);
    const double winf = w.cwiseAbs().maxCoeff();
    if (winf > 1.0) w /= winf;
    const double bd = gvec.dot(w);
    if (bd > best_bound + 1e-12 * (1.0 + std::abs(bd))) last_progress = it;
    best_bound = std::max(best_bound, bd);
  };

  const Index check_every = 50;
  Index iters_done = 0;
  std::vector<Index> zeroset;
  for (Index it = 1; it <= cfg.max_iters; ++it) {
    iters_done = it;
    // Projection onto the structured affine family.
    const Mat t1 = v2.transpose() * (z - g);  // zr x m
    const Mat t2 = t1 * u1;                   // zr x r
    x = g;
    x.noalias() += v2 * (t2 * u1.transpose());
    const double obj_x = norm_1(x);
    if (obj_x < best_obj - 1e-12 * (1.0 + best_obj)) last_progress = it;
    if (obj_x < best_obj) {
      best_obj = obj_x;
      best_x = x;
    }
    y = 2.0 * x - z;
    soft_threshold(y, gamma);
    diff = y - x;
    z += lambda * diff;
    const double merit = lambda * diff.norm();
    trace.record(it, obj_x, merit);

    const bool stalled = merit <= 1e-14 * (1.0 + z.norm());
    const bool last_it = stalled || it == cfg.max_iters || dl.expired() ||
                         it - last_progress > 5000;
    if (it % check_every == 0 || last_it) {
      if (with_basis) {
        zeroset.clear();
        for (Index i = 0; i < n; ++i) {
          for (Index j = 0; j < m; ++j) {
            if (y(i, j) == 0.0) zeroset.push_back(i * m + j);
          }
        }
        if (zeroset != last_zeroset &&
            (last_polish < 0 || it - last_polish >= 200 || last_it)) {
          last_zeroset = zeroset;
          polish(zeroset, it, last_it ? 16 : 3);
        }
        update_bound(it);
      }
      const double f_best = std::min(best_obj, best_pol_obj);
      if (with_basis &&
          f_best - best_bound <= cfg.solver_tol * (1.0 + std::abs(f_best))) {
        break;
      }
      if (stalled || it == cfg.max_iters || dl.expired() ||
          it - last_progress > 5000) {
        break;
      }
    }
  }

  Solution sol;
  if (have_pol && best_pol_obj <= best_obj) {
    sol.Z = best_pol_z;
  } else {
    const Mat t1 = v2.transpose() * (best_x - g);
    sol.Z = t1 * u1;
  }
  sol.H = h_from_z(f, sol.Z);
  sol.objective = objective_p1(f, sol.Z);
  sol.iterations = iters_done;
  if (with_basis) {
    sol.gap = std::max(0.0, sol.objective - best_bound);
    sol.status = sol.gap <= cfg.solver_tol * (1.0 + std::abs(sol.objective))
                     ? SolveStatus::Optimal
                     : SolveStatus::IterLimit;
  } else {
    sol.gap = -1.0;
    // Without a certificate, a stalled fixed point is the best evidence
    // available; report Optimal only on clean displacement convergence.
    sol.status = iters_done < cfg.max_iters && !dl.expired()
                     ? SolveStatus::Optimal
                     : SolveStatus::IterLimit;
  }
  sol.solver_name = "p123_splitting";
  sol.solve_time_s = seconds_since(t0);
  return sol;
}

}  // namespace

Solution solve_p123(const ReducedProblem& problem, const SolverConfig& cfg) {
  cfg.validate();
  if (problem.kind != ProblemKind::P123) {
    throw Error(ErrorCode::Config, "solve_p123: problem kind must be P123");
  }
  const auto t0 = Clock::now();
  const SvdFactors& f = *problem.factors;
  const Index n = f.cols();
  const Index m = f.rows();
  const Index r = f.rank;
  const Index zr = n - r;
  const Index d = zr * r;
  const Index nm = n * m;

  if (d == 0) return closed_form_solution(problem, "p123_closed_form", t0);

  const Deadline dl(cfg.time_cap_s, t0);
  if (nm + d <= cfg.lp_size_cap) {
    // LP route, solved through the dual:
    //   max g^T y  s.t.  K^T y = 0,  -1 <= y <= 1
    // whose equality multipliers are exactly the optimal Z, and whose
    // objective certifies the primal value.
    const Mat kbasis = structured_basis(f);
    const Vec gvec = vec_row_major(f.G);
    LinearProgram lp;
    lp.A = kbasis.transpose();
    lp.b = Vec::Zero(d);
    lp.c = -gvec;
    lp.lower = Vec::Constant(nm, -1.0);
    lp.upper = Vec::Constant(nm, 1.0);
    SimplexOptions so;
    so.time_cap_s = remaining_cap(cfg, dl);
    const LpResult lr = solve_lp(lp, so);
    if (lr.status == LpStatus::Optimal) {
      Mat zmat(zr, r);
      for (Index a = 0; a < zr; ++a) {
        zmat.row(a) = lr.y.segment(a * r, r).transpose();
      }
      Solution sol;
      sol.Z = zmat;
      sol.H = h_from_z(f, sol.Z);
      sol.objective = objective_p1(f, sol.Z);
      const double bound = gvec.dot(lr.x);
      sol.gap = std::max(0.0, sol.objective - bound);
      sol.iterations = lr.iterations;
      sol.solver_name = "p123_lp_dual";
      if (sol.gap <= 1e-6 * (1.0 + std::abs(sol.objective))) {
        sol.status = SolveStatus::Optimal;
        sol.solve_time_s = seconds_since(t0);
        return sol;
      }
      // A gap this large means the multiplier reconstruction is off;
      // fall through to the splitting path rather than mislabel it.
    }
  }
  return p123_splitting(problem, cfg, t0);
}

Solution solve_p21_l1(const ReducedProblem& problem, const SolverConfig& cfg) {
  cfg.validate();
  if (problem.kind != ProblemKind::P21L1) {
    throw Error(ErrorCode::Config, "solve_p21_l1: problem kind must be P21L1");
  }
  const auto t0 = Clock::now();
  const SvdFactors& f = *problem.factors;
  const Index n = f.cols();
  const Index m = f.rows();
  const Index r = f.rank;
  const Index zr = n - r;

  const double budget = problem.z_budget;
  const double relaxed = budget * (1.0 + cfg.budget_delta);
  const double viol_tol = cfg.budget_delta * budget;

  if (zr == 0) {
    Solution sol = closed_form_solution(problem, "p21l1_closed_form", t0);
    const double n21 = norm_21(sol.H);
    sol.constraint_violation = std::max(0.0, n21 - relaxed);
    if (sol.constraint_violation > viol_tol) {
      sol.status = SolveStatus::Infeasible;
    }
    return sol;
  }

  // The row solve supplies the forced candidate and a floor under the
  // attainable 2,1 mass, which decides infeasibility.
  SolverConfig inner = cfg;
  inner.trace_path.clear();
  inner.trace_sink = nullptr;
  const Solution s21 = solve_p21(build(ProblemKind::P21, problem.factors), inner);
  const double floor_gap = s21.gap >= 0.0 ? s21.gap : 0.0;
  const double feas_floor =
      s21.objective - std::max(floor_gap, 1e-9 * (1.0 + s21.objective));
  if (relaxed < feas_floor) {
    Solution sol;
    sol.Z = Mat::Zero(zr, r);
    sol.H = h_from_z(f, sol.Z);
    sol.objective = objective_p1(f, sol.Z);
    sol.status = SolveStatus::Infeasible;
    sol.iterations = s21.iterations;
    sol.constraint_violation =
        std::max(0.0, norm_21(sol.H) - relaxed);
    sol.solver_name = "p21l1_consensus";
    sol.solve_time_s = seconds_since(t0);
    return sol;
  }

  Tracer trace(cfg);
  const Deadline dl(cfg.time_cap_s, t0);

  const Mat v2 = f.V2();
  const Mat u1 = f.U1();
  const Mat& g = f.G;
  const Index nm = n * m;

  const double lambda = cfg.relaxation;
  const double gamma = cfg.gamma_scale * 0.5 * norm_1(g) / nm;

  // Consensus splitting over three copies: 1-norm prox, structured-affine
  // projection, 2,1-ball projection.
  Mat z1 = g, z2 = g, z3 = g;
  Mat xbar(n, m), y1(n, m), y2(n, m), y3(n, m);

  double best_obj = kInf;
  Mat best_h;
  bool have_best = false;
  double best_any_viol = kInf;
  double best_any_obj = kInf;
  Mat best_any_h;
  Index last_progress = 0;

  const Index check_every = 50;
  Index iters_done = 0;
  for (Index it = 1; it <= cfg.max_iters; ++it) {
    iters_done = it;
    xbar = (z1 + z2 + z3) / 3.0;

    y1 = 2.0 * xbar - z1;
    soft_threshold(y1, 3.0 * gamma);

    y2 = 2.0 * xbar - z2;
    {
      const Mat t1 = v2.transpose() * (y2 - g);
      y2 = g;
      y2.noalias() += v2 * ((t1 * u1) * u1.transpose());
    }

    y3 = 2.0 * xbar - z3;
    project_ball_21(y3, relaxed);

    z1 += lambda * (y1 - xbar);
    z2 += lambda * (y2 - xbar);
    z3 += lambda * (y3 - xbar);

    const double merit =
        lambda * std::sqrt((y1 - xbar).squaredNorm() + (y2 - xbar).squaredNorm() +
                           (y3 - xbar).squaredNorm());

    // y2 is exactly structured, so it is the candidate worth keeping.
    const double cand_obj = norm_1(y2);
    const double cand_viol = std::max(0.0, norm_21(y2) - relaxed);
    if (cand_viol <= viol_tol && cand_obj < best_obj) {
      if (cand_obj < best_obj - 1e-12 * (1.0 + best_obj)) last_progress = it;
      best_obj = cand_obj;
      best_h = y2;
      have_best = true;
    }
    if (cand_viol < best_any_viol ||
        (cand_viol == best_any_viol && cand_obj < best_any_obj)) {
      best_any_viol = cand_viol;
      best_any_obj = cand_obj;
      best_any_h = y2;
    }
    trace.record(it, cand_obj, merit);

    const bool stalled = merit <= 1e-13 * (1.0 + z1.norm());
    if (it % check_every == 0 || stalled || it == cfg.max_iters) {
      if (stalled || dl.expired()) break;
      if (it - last_progress > 3000) break;
    }
  }

  // Final selection: the forced candidate from the row solve competes with
  // the consensus iterate, restricted to budget-admissible candidates.
  const double s21_norm21 = norm_21(s21.H);
  const bool s21_ok = s21_norm21 <= relaxed + viol_tol;
  const double s21_norm1 = norm_1(s21.H);

  Mat h_pick;
  bool picked = false;
  if (have_best && (!s21_ok || best_obj <= s21_norm1)) {
    h_pick = best_h;
    picked = true;
  } else if (s21_ok) {
    h_pick = s21.H;
    picked = true;
  }
  SolveStatus status = SolveStatus::Optimal;
  if (!picked) {
    h_pick = best_any_h.size() > 0 ? best_any_h : s21.H;
    status = SolveStatus::IterLimit;
  }

  Solution sol;
  {
    const Mat t1 = v2.transpose() * (h_pick - g);
    sol.Z = t1 * u1;
  }
  sol.H = h_from_z(f, sol.Z);
  sol.objective = objective_p1(f, sol.Z);
  sol.constraint_violation = std::max(0.0, norm_21(sol.H) - relaxed);
  if (sol.constraint_violation > viol_tol) status = SolveStatus::IterLimit;
  sol.status = status;
  sol.iterations = iters_done;
  sol.solver_name = "p21l1_consensus";
  sol.solve_time_s = seconds_since(t0);
  return sol;
}

Solution solve_p123_full(const Mat& a, const SolverConfig& cfg) {
  cfg.validate();
  require_finite(a, "solve_p123_full: A");
  if (a.rows() == 0 || a.cols() == 0) {
    throw Error(ErrorCode::Dimension, "solve_p123_full: matrix must be nonempty");
  }
  if (a.cwiseAbs().maxCoeff() == 0.0) {
    throw Error(ErrorCode::ZeroMatrix, "solve_p123_full: zero matrix");
  }
  const Index m = a.rows();
  const Index n = a.cols();
  const Index nm = n * m;
  if (nm > cfg.full_cap) {
    throw Error(ErrorCode::SizeCap,
                "solve_p123_full: n*m exceeds the configured cap");
  }
  const auto t0 = Clock::now();
  const Deadline dl(cfg.time_cap_s, t0);

  // Constraint algebra, all from pivoted QRs of A alone (this route shares
  // no code with the SVD-based one). Write A = Q1 * S with Q1 an
  // orthonormal basis of col(A) and S of full row rank, and let P be the
  // orthogonal projector onto col(A). Then
  //   AHA = A                  <=>  S H Q1 = I,
  // and, under AHA = A with AH symmetric, AH equals P for every feasible
  // H, which turns the reflexivity condition HAH = H into H P = H; the
  // symmetry of AH itself is implied by these two. That gives an exactly
  // irredundant equality system: r^2 rows from S H Q1 = I and n*(m - r)
  // rows from H (I - P) = 0 restricted to an independent column subset.
  Eigen::ColPivHouseholderQR<Mat> aqr(a);
  aqr.setThreshold(1e-10);
  const Index arank = aqr.rank();
  const Mat q1 = (aqr.householderQ() * Mat::Identity(m, arank)).leftCols(arank);
  const Mat s_fac = q1.transpose() * a;  // arank x n
  Mat resid_basis;                       // m x (m - arank), spans ker(P)
  {
    const Mat ip = Mat::Identity(m, m) - q1 * q1.transpose();
    Eigen::ColPivHouseholderQR<Mat> pqr(ip);
    pqr.setThreshold(1e-10);
    resid_basis =
        (pqr.householderQ() * Mat::Identity(m, m - arank)).leftCols(m - arank);
  }

  const Index rows_p1 = arank * arank;
  const Index rows_p2 = n * (m - arank);
  const Index rank = rows_p1 + rows_p2;
  Mat c_red(rank, nm);
  Vec rhs_red(rank);
  for (Index aa = 0; aa < arank; ++aa) {
    for (Index bb = 0; bb < arank; ++bb) {
      const Index row = aa * arank + bb;
      for (Index i = 0; i < n; ++i) {
        const double sai = s_fac(aa, i);
        for (Index j = 0; j < m; ++j) {
          c_red(row, i * m + j) = sai * q1(j, bb);
        }
      }
      rhs_red(row) = aa == bb ? 1.0 : 0.0;
    }
  }
  for (Index i = 0; i < n; ++i) {
    for (Index t = 0; t < m - arank; ++t) {
      const Index row = rows_p1 + i * (m - arank) + t;
      c_red.row(row).setZero();
      for (Index j = 0; j < m; ++j) {
        c_red(row, i * m + j) = resid_basis(j, t);
      }
      rhs_red(row) = 0.0;
    }
  }

  // Equilibrate: the row families have different scales, and the simplex
  // behaves better on unit rows.
  for (Index i = 0; i < rank; ++i) {
    const double len = c_red.row(i).norm();
    if (len > 0.0) {
      c_red.row(i) /= len;
      rhs_red(i) /= len;
    }
  }

  // Split h = p - q, p,q >= 0, and minimize the sum.
  LinearProgram lp;
  lp.A.resize(rank, 2 * nm);
  lp.A.leftCols(nm) = c_red;
  lp.A.rightCols(nm) = -c_red;
  lp.b = rhs_red;
  lp.c = Vec::Ones(2 * nm);
  lp.lower = Vec::Zero(2 * nm);
  lp.upper = Vec::Constant(2 * nm, kInf);
  SimplexOptions so;
  so.time_cap_s = remaining_cap(cfg, dl);
  const LpResult lr = solve_lp(lp, so);

  if (lr.status == LpStatus::Infeasible) {
    throw Error(ErrorCode::Internal,
                "solve_p123_full: constraint system reported infeasible");
  }
  if (lr.status == LpStatus::Unbounded) {
    throw Error(ErrorCode::Internal, "solve_p123_full: LP unbounded");
  }

  Solution sol;
  sol.Z = Mat(0, 0);
  sol.H = Mat(n, m);
  if (lr.x.size() == 2 * nm) {
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < m; ++j) {
        const Index k = i * m + j;
        sol.H(i, j) = lr.x(k) - lr.x(nm + k);
      }
    }
  } else {
    sol.H.setZero();
  }
  sol.objective = norm_1(sol.H);
  sol.iterations = lr.iterations;
  sol.status = lr.status == LpStatus::Optimal ? SolveStatus::Optimal
                                              : SolveStatus::IterLimit;
  if (lr.status == LpStatus::Optimal) {
    sol.gap = std::max(0.0, sol.objective - rhs_red.dot(lr.y));
  }
  sol.solver_name = "p123_full_lp";
  sol.solve_time_s = seconds_since(t0);

  // The projector identity above is only as good as the computed rank of
  // A; verify reflexivity on the returned point and refuse to hand back a
  // solution that silently fails it.
  if (lr.status == LpStatus::Optimal) {
    const double r_p2 = (sol.H * a * sol.H - sol.H).norm();
    if (r_p2 > 1e-6 * a.norm()) {
      throw Error(ErrorCode::Internal,
                  "solve_p123_full: optimal point fails the reflexivity "
                  "check, r_p2 = " +
                      std::to_string(r_p2) + ", objective = " +
                      std::to_string(sol.objective) + ", gap = " +
                      std::to_string(sol.gap));
    }
  }
  return sol;
}

Solution column_variant(const Mat& a, const SolverConfig& cfg,
                        const ToleranceConfig& tol) {
  const auto t0 = Clock::now();
  auto factors_t = std::make_shared<SvdFactors>(svd(a.transpose(), tol));
  const Solution inner = solve_p21(build(ProblemKind::P21, factors_t), cfg);
  Solution sol = inner;
  sol.H = inner.H.transpose();
  sol.solver_name = "p21_column_transpose";
  sol.solve_time_s = seconds_since(t0);
  return sol;
}

double oracle_small(const ReducedProblem& problem, const OracleGrid& grid) {
  const SvdFactors& f = *problem.factors;
  const Index zr = f.cols() - f.rank;
  const Index r = f.rank;
  const Index d = zr * r;
  if (d > 2) {
    throw Error(ErrorCode::Dimension,
                "oracle_small: variable block has more than 2 entries");
  }

  const double relaxed = problem.kind == ProblemKind::P21L1
                             ? problem.z_budget * (1.0 + 1e-8)
                             : 0.0;
  auto eval = [&](double za, double zb) {
    Mat z = Mat::Zero(zr, r);
    if (d >= 1) z(0, 0) = za;
    if (d == 2) {
      // Row-major second entry regardless of the block's orientation.
      z(zr == 1 ? 0 : 1, zr == 1 ? 1 : 0) = zb;
    }
    switch (problem.kind) {
      case ProblemKind::P21:
        return objective_p21(f, z);
      case ProblemKind::P123:
        return objective_p1(f, z);
      case ProblemKind::P21L1: {
        const double n21 = objective_p21(f, z);
        if (n21 > relaxed + 1e-12) return kInf;
        return objective_p1(f, z);
      }
    }
    return kInf;
  };

  if (d == 0) return eval(0.0, 0.0);

  if (d == 1) {
    double best_z = 0.0, best_f = kInf;
    double lo = grid.lo, hi = grid.hi;
    Index count = grid.coarse_1d;
    double step = (hi - lo) / static_cast<double>(count - 1);
    for (Index round = 0; round <= grid.refine_rounds; ++round) {
      for (Index i = 0; i < count; ++i) {
        const double zv = lo + step * static_cast<double>(i);
        const double fv = eval(zv, 0.0);
        if (fv < best_f) {
          best_f = fv;
          best_z = zv;
        }
      }
      lo = best_z - step;
      hi = best_z + step;
      count = grid.refine_points;
      step = (hi - lo) / static_cast<double>(count - 1);
    }
    return best_f;
  }

  double best_a = 0.0, best_b = 0.0, best_f = kInf;
  double lo_a = grid.lo, hi_a = grid.hi, lo_b = grid.lo, hi_b = grid.hi;
  Index count = grid.coarse_2d;
  double step_a = (hi_a - lo_a) / static_cast<double>(count - 1);
  double step_b = step_a;
  for (Index round = 0; round <= grid.refine_rounds; ++round) {
    for (Index i = 0; i < count; ++i) {
      const double za = lo_a + step_a * static_cast<double>(i);
      for (Index j = 0; j < count; ++j) {
        const double zb = lo_b + step_b * static_cast<double>(j);
        const double fv = eval(za, zb);
        if (fv < best_f) {
          best_f = fv;
          best_a = za;
          best_b = zb;
        }
      }
    }
    lo_a = best_a - step_a;
    hi_a = best_a + step_a;
    lo_b = best_b - step_b;
    hi_b = best_b + step_b;
    count = grid.refine_points;
    step_a = (hi_a - lo_a) / static_cast<double>(count - 1);
    step_b = (hi_b - lo_b) / static_cast<double>(count - 1);
  }
  return best_f;
}

}  // namespace ginv
