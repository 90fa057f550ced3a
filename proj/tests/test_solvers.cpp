#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "errors.hpp"
#include "gamma.hpp"
#include "generate.hpp"
#include "properties.hpp"
#include "reduced.hpp"
#include "rng.hpp"
#include "solvers.hpp"
#include "svd.hpp"

using namespace ginv;

namespace {

std::shared_ptr<const SvdFactors> factors_of(const Mat& a) {
  return std::make_shared<const SvdFactors>(svd(a));
}

void check_residuals_p123(const Mat& a, const Mat& h) {
  const auto res = property_residuals(a, h);
  const double tol = 1e-6 * a.norm();
  CHECK(res[0] <= tol);
  CHECK(res[1] <= tol);
  CHECK(res[2] <= tol);
}

}  // namespace

TEST_CASE("ones(2,2): the classic closed-form values") {
  const Mat a = Mat::Ones(2, 2);
  const auto f = factors_of(a);
  REQUIRE(f->rank == 1);

  const Solution p21 = solve_p21(build(ProblemKind::P21, f));
  REQUIRE(p21.status == SolveStatus::Optimal);
  CHECK(p21.objective == doctest::Approx(0.7071067811865476).epsilon(1e-9));
  check_residuals_p123(a, p21.H);
  const auto res21 = property_residuals(a, p21.H);
  CHECK(res21[3] <= 1e-6 * a.norm());  // this instance's optimum is A† itself

  const Solution p123 = solve_p123(build(ProblemKind::P123, f));
  REQUIRE(p123.status == SolveStatus::Optimal);
  CHECK(p123.objective == doctest::Approx(1.0).epsilon(1e-9));
  check_residuals_p123(a, p123.H);

  const Solution full = solve_p123_full(a);
  REQUIRE(full.status == SolveStatus::Optimal);
  CHECK(full.objective == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("ones(2,2): oracle agreement") {
  const Mat a = Mat::Ones(2, 2);
  const auto f = factors_of(a);
  const ReducedProblem p21 = build(ProblemKind::P21, f);
  const ReducedProblem p123 = build(ProblemKind::P123, f);
  CHECK(std::abs(oracle_small(p21) - solve_p21(p21).objective) <= 1e-4);
  CHECK(std::abs(oracle_small(p123) - solve_p123(p123).objective) <= 1e-4);
}

TEST_CASE("budgeted solve: feasible, tight and infeasible budgets") {
  const Mat a = Mat::Ones(2, 2);
  const auto f = factors_of(a);
  const double z21 = solve_p21(build(ProblemKind::P21, f)).objective;

  const Solution loose = solve_p21_l1(build(ProblemKind::P21L1, f, 0.8));
  REQUIRE(loose.status == SolveStatus::Optimal);
  CHECK(loose.objective == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(norm_21(loose.H) <= 0.8 * (1.0 + 1e-6));

  // at the exact row-sparse optimum the budget still admits a solution
  const Solution tight = solve_p21_l1(build(ProblemKind::P21L1, f, z21));
  REQUIRE(tight.status == SolveStatus::Optimal);
  CHECK(tight.objective == doctest::Approx(1.0).epsilon(1e-6));

  const Solution bad = solve_p21_l1(build(ProblemKind::P21L1, f, 0.5));
  CHECK(bad.status == SolveStatus::Infeasible);
}

TEST_CASE("rank-1 diagonal: both programs reach 0.5") {
  Mat a(2, 2);
  a << 2, 0, 0, 0;
  const auto f = factors_of(a);
  CHECK(solve_p21(build(ProblemKind::P21, f)).objective ==
        doctest::Approx(0.5).epsilon(1e-9));
  CHECK(solve_p123(build(ProblemKind::P123, f)).objective ==
        doctest::Approx(0.5).epsilon(1e-9));
  CHECK(std::abs(oracle_small(build(ProblemKind::P21, f)) - 0.5) <= 1e-4);
  CHECK(std::abs(oracle_small(build(ProblemKind::P123, f)) - 0.5) <= 1e-4);
}

TEST_CASE("full column rank leaves no freedom: every route returns A+") {
  Mat a(3, 2);
  a << 1, 2, 0, 1, 1, 0;
  const auto f = factors_of(a);
  REQUIRE(f->rank == 2);

  const Solution p21 = solve_p21(build(ProblemKind::P21, f));
  const Solution p123 = solve_p123(build(ProblemKind::P123, f));
  const Solution full = solve_p123_full(a);
  CHECK(p21.objective == doctest::Approx(1.490221198365).epsilon(1e-9));
  CHECK(p123.objective == doctest::Approx(2.333333333333).epsilon(1e-9));
  CHECK(full.objective == doctest::Approx(p123.objective).epsilon(1e-9));
  CHECK((p123.H - f->G).norm() <= 1e-9);
}

TEST_CASE("column variant swaps the enforced symmetry side") {
  Mat a(3, 2);
  a << 1, 2, 0, 1, 1, 0;
  const Solution col = column_variant(a);
  REQUIRE(col.status == SolveStatus::Optimal);
  CHECK(col.objective == doctest::Approx(1.618033988750).epsilon(1e-9));
  const auto res = property_residuals(a, col.H);
  const double tol = 1e-6 * a.norm();
  CHECK(res[0] <= tol);
  CHECK(res[1] <= tol);
  CHECK(res[3] <= tol);
  CHECK(res[2] > 0.5);  // ah-symmetry is deliberately not enforced
}

TEST_CASE("row solve satisfies P1, P2, P3 across random instances") {
  for (const std::uint64_t seed : {41u, 42u, 43u, 44u}) {
    const Mat a = generate(InstanceSpec{16, 10, 5, 0.5, seed});
    const Solution s = solve_p21(build(ProblemKind::P21, factors_of(a)));
    REQUIRE(s.status == SolveStatus::Optimal);
    check_residuals_p123(a, s.H);
    CHECK(s.objective == doctest::Approx(norm_21(s.H)).epsilon(1e-7));
  }
}

TEST_CASE("reduced and unreduced entrywise optima coincide") {
  for (const std::uint64_t seed : {51u, 52u, 53u}) {
    const Mat a = generate(InstanceSpec{12, 8, 4, 0.5, seed});
    const Solution reduced = solve_p123(build(ProblemKind::P123, factors_of(a)));
    const Solution full = solve_p123_full(a);
    REQUIRE(reduced.status == SolveStatus::Optimal);
    REQUIRE(full.status == SolveStatus::Optimal);
    CHECK(std::abs(reduced.objective - full.objective) <=
          1e-6 * (1.0 + std::abs(reduced.objective)));
    check_residuals_p123(a, full.H);
    const auto res = property_residuals(a, full.H);
    CHECK(res[1] <= 1e-6 * a.norm());  // reflexivity holds and is verified
  }
}

TEST_CASE("frozen optimum of the mid-size reference instance") {
  const Mat a = generate(InstanceSpec{40, 20, 10, 0.5, 1});
  const Solution s = solve_p123(build(ProblemKind::P123, factors_of(a)));
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.objective == doctest::Approx(36.520190378228).epsilon(1e-8));
}

TEST_CASE("splitting route agrees with the exact LP route") {
  const Mat a = generate(InstanceSpec{12, 8, 4, 0.5, 61});
  const auto f = factors_of(a);
  const Solution exact = solve_p123(build(ProblemKind::P123, f));

  SolverConfig force_splitting;
  force_splitting.lp_size_cap = 0;
  const Solution split = solve_p123(build(ProblemKind::P123, f), force_splitting);
  CHECK(std::abs(split.objective - exact.objective) <=
        1e-5 * (1.0 + std::abs(exact.objective)));
  check_residuals_p123(a, split.H);
}

TEST_CASE("structured basis reproduces the affine family") {
  const Mat a = generate(InstanceSpec{9, 7, 3, 0.5, 62});
  const auto f = factors_of(a);
  const Mat k = structured_basis(*f);
  const Index nm = 7 * 9;
  const Index d = (7 - 3) * 3;
  REQUIRE(k.rows() == nm);
  REQUIRE(k.cols() == d);

  Rng rng(63);
  Mat z(4, 3);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 3; ++j) z(i, j) = rng.next_range(-1.0, 1.0);
  const Mat h = h_from_z(*f, z);

  Vec vec_h(nm), vec_z(d);
  Index t = 0;
  for (Index i = 0; i < 7; ++i)
    for (Index j = 0; j < 9; ++j) vec_h(t++) = h(i, j);
  t = 0;
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 3; ++j) vec_z(t++) = z(i, j);
  Vec vec_g(nm);
  t = 0;
  for (Index i = 0; i < 7; ++i)
    for (Index j = 0; j < 9; ++j) vec_g(t++) = f->G(i, j);

  CHECK((vec_g + k * vec_z - vec_h).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("size caps and iteration limits surface as errors and statuses") {
  const Mat a = generate(InstanceSpec{12, 8, 4, 0.5, 64});
  SolverConfig cfg;
  cfg.full_cap = 10;
  CHECK_THROWS_AS(solve_p123_full(a, cfg), Error);
  try {
    solve_p123_full(a, cfg);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SizeCap);
  }

  SolverConfig tiny;
  tiny.lp_size_cap = 0;  // force the iterative route
  tiny.max_iters = 3;
  tiny.solver_tol = 1e-16;
  const Solution s = solve_p123(build(ProblemKind::P123, factors_of(a)), tiny);
  CHECK(s.status == SolveStatus::IterLimit);
}

TEST_CASE("solver configuration validation") {
  SolverConfig cfg;
  cfg.relaxation = 2.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = SolverConfig{};
  cfg.solver_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = SolverConfig{};
  cfg.max_iters = -1;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("trace sink collects iterations on the splitting route") {
  const Mat a = generate(InstanceSpec{10, 6, 3, 0.5, 65});
  SolverConfig cfg;
  cfg.lp_size_cap = 0;
  std::vector<SolverTraceRow> rows;
  cfg.trace_sink = &rows;
  solve_p123(build(ProblemKind::P123, factors_of(a)), cfg);
  REQUIRE(!rows.empty());
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].iter > rows[i - 1].iter);
  }
}

TEST_CASE("solves are deterministic") {
  const Mat a = generate(InstanceSpec{14, 9, 4, 0.5, 66});
  const auto f = factors_of(a);
  const Solution s1 = solve_p21(build(ProblemKind::P21, f));
  const Solution s2 = solve_p21(build(ProblemKind::P21, f));
  CHECK((s1.H.array() == s2.H.array()).all());
  CHECK(s1.objective == s2.objective);
  CHECK(s1.iterations == s2.iterations);

  const Solution c1 = column_variant(a);
  const Solution c2 = column_variant(a);
  CHECK((c1.H.array() == c2.H.array()).all());
}
