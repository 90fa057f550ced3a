#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "errors.hpp"
#include "lp.hpp"
#include "rng.hpp"

using namespace ginv;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

LinearProgram make_lp(Index m, Index n) {
  LinearProgram lp;
  lp.A = Mat::Zero(m, n);
  lp.b = Vec::Zero(m);
  lp.c = Vec::Zero(n);
  lp.lower = Vec::Constant(n, -kInf);
  lp.upper = Vec::Constant(n, kInf);
  return lp;
}

// First-order optimality for the bounded simplex: primal feasibility plus
// sign conditions on the reduced costs r = c - A^T y at the active bounds.
void check_kkt(const LinearProgram& lp, const LpResult& res) {
  REQUIRE(res.status == LpStatus::Optimal);
  const double bscale = 1.0 + lp.b.cwiseAbs().maxCoeff();
  CHECK((lp.A * res.x - lp.b).cwiseAbs().maxCoeff() <= 1e-7 * bscale);

  const Vec red = lp.c - lp.A.transpose() * res.y;
  for (Index j = 0; j < lp.c.size(); ++j) {
    const double xj = res.x(j);
    CHECK(xj >= lp.lower(j) - 1e-7);
    CHECK(xj <= lp.upper(j) + 1e-7);
    const bool at_lower = std::isfinite(lp.lower(j)) && xj <= lp.lower(j) + 1e-7;
    const bool at_upper = std::isfinite(lp.upper(j)) && xj >= lp.upper(j) - 1e-7;
    CAPTURE(j);
    if (at_lower && at_upper) continue;  // fixed variable, any sign
    if (at_lower) {
      CHECK(red(j) >= -1e-6);
    } else if (at_upper) {
      CHECK(red(j) <= 1e-6);
    } else {
      CHECK(std::abs(red(j)) <= 1e-6);
    }
  }
  CHECK(res.objective == doctest::Approx(lp.c.dot(res.x)).epsilon(1e-9));
}

}  // namespace

TEST_CASE("two-variable textbook problem") {
  // min -x - 2y  s.t.  x + y = 1,  0 <= x,y <= 1  ->  x=0, y=1, obj -2
  LinearProgram lp = make_lp(1, 2);
  lp.A << 1, 1;
  lp.b << 1;
  lp.c << -1, -2;
  lp.lower.setZero();
  lp.upper.setOnes();
  const LpResult res = solve_lp(lp);
  check_kkt(lp, res);
  CHECK(res.objective == doctest::Approx(-2.0));
  CHECK(res.x(1) == doctest::Approx(1.0));
}

TEST_CASE("free variables and negative bounds") {
  // min x1 + x2  s.t.  x1 - x2 = 3,  x1 in [-1, 5], x2 free
  LinearProgram lp = make_lp(1, 2);
  lp.A << 1, -1;
  lp.b << 3;
  lp.c << 1, 1;
  lp.lower(0) = -1.0;
  lp.upper(0) = 5.0;
  const LpResult res = solve_lp(lp);
  check_kkt(lp, res);
  // x1 = -1, x2 = -4 minimizes the sum
  CHECK(res.objective == doctest::Approx(-5.0));
}

TEST_CASE("infeasible equalities are detected") {
  LinearProgram lp = make_lp(1, 2);
  lp.A << 1, 1;
  lp.b << 3;
  lp.c << 1, 1;
  lp.lower.setZero();
  lp.upper.setOnes();
  CHECK(solve_lp(lp).status == LpStatus::Infeasible);
}

TEST_CASE("unbounded rays are detected") {
  LinearProgram lp = make_lp(1, 2);
  lp.A << 1, -1;
  lp.b << 0;
  lp.c << -1, 0;
  lp.lower.setZero();  // x = y -> +inf drives the objective down
  const LpResult res = solve_lp(lp);
  CHECK(res.status == LpStatus::Unbounded);
}

TEST_CASE("redundant rows are tolerated") {
  LinearProgram lp = make_lp(3, 3);
  lp.A << 1, 1, 0, 2, 2, 0, 0, 0, 1;  // row 2 = 2 * row 1
  lp.b << 1, 2, 0.5;
  lp.c << 1, 2, 1;
  lp.lower.setZero();
  lp.upper.setOnes();
  const LpResult res = solve_lp(lp);
  check_kkt(lp, res);
  CHECK(res.objective == doctest::Approx(1.5));
}

TEST_CASE("iteration cap reports IterLimit") {
  LinearProgram lp = make_lp(2, 6);
  Rng rng(5);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 6; ++j) lp.A(i, j) = rng.next_range(-1.0, 1.0);
  lp.b << 0.3, -0.2;
  for (Index j = 0; j < 6; ++j) lp.c(j) = rng.next_range(-1.0, 1.0);
  lp.lower.setConstant(-1.0);
  lp.upper.setConstant(1.0);
  SimplexOptions opt;
  opt.max_iters = 1;
  CHECK(solve_lp(lp, opt).status == LpStatus::IterLimit);
}

TEST_CASE("random boxed problems satisfy first-order optimality") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    Rng rng(seed);
    const Index m = 2 + static_cast<Index>(rng.next_below(6));
    const Index n = m + 1 + static_cast<Index>(rng.next_below(10));
    LinearProgram lp = make_lp(m, n);
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < n; ++j) lp.A(i, j) = rng.next_range(-1.0, 1.0);
    for (Index j = 0; j < n; ++j) lp.c(j) = rng.next_range(-1.0, 1.0);
    lp.lower.setConstant(-1.0);
    lp.upper.setConstant(1.0);
    // keep b reachable: image of an interior point
    Vec x0(n);
    for (Index j = 0; j < n; ++j) x0(j) = rng.next_range(-0.5, 0.5);
    lp.b = lp.A * x0;

    CAPTURE(seed);
    const LpResult res = solve_lp(lp);
    check_kkt(lp, res);
  }
}

TEST_CASE("zero right-hand side with box bounds is handled") {
  // Maximally degenerate start: every equality passes through the origin.
  Rng rng(77);
  const Index m = 8, n = 20;
  LinearProgram lp = make_lp(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) lp.A(i, j) = rng.next_range(-1.0, 1.0);
  for (Index j = 0; j < n; ++j) lp.c(j) = rng.next_range(-1.0, 1.0);
  lp.lower.setConstant(-1.0);
  lp.upper.setConstant(1.0);
  lp.b.setZero();
  const LpResult res = solve_lp(lp);
  check_kkt(lp, res);
  CHECK(res.objective <= 1e-9);  // x = 0 is feasible, so the optimum is <= 0
}

TEST_CASE("solver is deterministic") {
  Rng rng(31);
  LinearProgram lp = make_lp(4, 12);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 12; ++j) lp.A(i, j) = rng.next_range(-1.0, 1.0);
  for (Index j = 0; j < 12; ++j) lp.c(j) = rng.next_range(-1.0, 1.0);
  lp.lower.setConstant(-2.0);
  lp.upper.setConstant(2.0);
  lp.b = lp.A * Vec::Constant(12, 0.1);
  const LpResult r1 = solve_lp(lp);
  const LpResult r2 = solve_lp(lp);
  REQUIRE(r1.status == LpStatus::Optimal);
  CHECK((r1.x.array() == r2.x.array()).all());
  CHECK(r1.objective == r2.objective);
  CHECK(r1.iterations == r2.iterations);
}
