#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "errors.hpp"
#include "generate.hpp"
#include "local_search.hpp"
#include "properties.hpp"
#include "rng.hpp"
#include "svd.hpp"

using namespace ginv;

namespace {

// |det| of the submatrix cut by (rows, cols), recomputed from scratch.
double absdet_of(const Mat& a, const std::vector<Index>& rows,
                 const std::vector<Index>& cols) {
  const Index r = static_cast<Index>(rows.size());
  Mat sub(r, r);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < r; ++j)
      sub(i, j) = a(rows[static_cast<std::size_t>(i)],
                    cols[static_cast<std::size_t>(j)]);
  return std::abs(sub.determinant());
}

}  // namespace

TEST_CASE("hand-worked 2x3 example") {
  Mat a(2, 3);
  a << 1, 2, 3, 2, 4, 7;

  const std::vector<Index> rows = select_rows(a);
  REQUIRE(rows == std::vector<Index>{0, 1});

  LsState st = make_state(a, rows, {0, 2});
  CHECK(st.absdet == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(st.sub_inv(0, 0) == doctest::Approx(7.0).epsilon(1e-12));
  CHECK(st.sub_inv(0, 1) == doctest::Approx(-3.0).epsilon(1e-12));
  CHECK(st.sub_inv(1, 0) == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(st.sub_inv(1, 1) == doctest::Approx(1.0).epsilon(1e-12));

  // replacing column 0 by column 1 doubles |det|; by itself keeps it
  CHECK(swap_ratio(st, a, 0, 1) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(swap_ratio(st, a, 1, 1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(swap_ratio(st, a, 0, 0) == doctest::Approx(1.0).epsilon(1e-12));

  improve_state(st, a);
  CHECK(st.cols == std::vector<Index>{1, 2});
  CHECK(st.absdet == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(st.swaps == 1);
  CHECK(st.status == SolveStatus::Optimal);

  // the pivoted initialization already lands on the optimum
  const LsState direct = local_search(a);
  CHECK(direct.cols == std::vector<Index>{1, 2});
  CHECK(direct.absdet == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(direct.swaps == 0);
}

TEST_CASE("apply_swap keeps the cached inverse consistent") {
  Mat a(2, 3);
  a << 1, 2, 3, 2, 4, 7;
  LsState st = make_state(a, {0, 1}, {0, 2});
  apply_swap(st, a, 0, 1);
  CHECK(st.cols == std::vector<Index>{1, 2});
  CHECK(st.absdet == doctest::Approx(2.0).epsilon(1e-12));
  CHECK((st.sub * st.sub_inv - Mat::Identity(2, 2)).norm() < 1e-12);

  // swapping in a column that makes the submatrix singular must throw
  LsState bad = make_state(a, {0, 1}, {1, 2});
  CHECK_THROWS_AS(apply_swap(bad, a, 1, 1), Error);
}

TEST_CASE("degenerate inputs") {
  const Mat ones = Mat::Ones(2, 2);
  const LsState st = local_search(ones);
  const Mat h = build_ah_symmetric(ones, st.cols);
  REQUIRE(h.rows() == 2);
  REQUIRE(h.cols() == 2);
  CHECK(h(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(h(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(nonzero_rows(h, 1e-12) == 1);

  Mat d(2, 2);
  d << 2, 0, 0, 0;
  const Mat hd = build_ah_symmetric(d, local_search(d).cols);
  CHECK(hd(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(hd(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(hd(1, 0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(hd(1, 1) == doctest::Approx(0.0).epsilon(1e-12));

  CHECK_THROWS_AS(select_rows(Mat::Zero(3, 3)), Error);
}

TEST_CASE("configuration validation") {
  LsConfig cfg;
  cfg.kappa = 0.99;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = LsConfig{};
  cfg.refresh_every = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = LsConfig{};
  cfg.max_swaps = -1;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("max_swaps exhaustion reports an iteration limit") {
  Mat a(2, 3);
  a << 1, 2, 3, 2, 4, 7;
  LsState st = make_state(a, {0, 1}, {0, 2});
  LsConfig cfg;
  cfg.max_swaps = 0;
  improve_state(st, a, cfg);
  CHECK(st.status == SolveStatus::IterLimit);
  CHECK(st.cols == std::vector<Index>{0, 2});  // untouched
}

TEST_CASE("accepted swaps grow |det| by more than kappa each") {
  const Mat a = generate(InstanceSpec{30, 18, 9, 0.6, 11});
  LsConfig cfg;
  cfg.kappa = 1.01;
  std::ostringstream trace;
  cfg.trace_sink = &trace;
  const LsState st = local_search(a, cfg);
  REQUIRE(st.status == SolveStatus::Optimal);

  std::istringstream in(trace.str());
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "iteration,j,k,ratio,absdet");
  Index parsed = 0;
  double prev_logdet = -1e300;
  while (std::getline(in, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    long long iter = -1, j = -1, k = -1;
    double ratio = 0.0, absdet = 0.0;
    fields >> iter >> j >> k >> ratio >> absdet;
    CHECK(ratio > cfg.kappa);
    const double logdet = std::log(absdet);
    CHECK(logdet > prev_logdet + std::log(cfg.kappa) - 1e-9);
    prev_logdet = logdet;
    ++parsed;
  }
  CHECK(parsed == st.swaps);
}

TEST_CASE("swap ratios match determinants recomputed from scratch") {
  const Mat a = generate(InstanceSpec{12, 9, 5, 0.7, 7});
  const std::vector<Index> rows = select_rows(a);
  const std::vector<Index> cols = initial_cols(a, rows);
  const LsState st = make_state(a, rows, cols);
  const double base = absdet_of(a, rows, cols);
  REQUIRE(base > 0.0);

  Rng rng(99);
  Index checked = 0;
  double worst = 0.0;
  while (checked < 1000) {
    const Index j = static_cast<Index>(rng.next_below(st.cols.size()));
    const Index k = static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(a.cols())));
    if (std::find(st.cols.begin(), st.cols.end(), k) != st.cols.end()) continue;

    std::vector<Index> swapped = st.cols;
    swapped[static_cast<std::size_t>(j)] = k;
    std::sort(swapped.begin(), swapped.end());
    const double truth = absdet_of(a, rows, swapped) / base;
    const double fast = swap_ratio(st, a, j, k);
    if (truth <= 1e-12) continue;  // near-singular targets are skipped
    const double rel = std::abs(fast - truth) / truth;
    worst = std::max(worst, rel);
    ++checked;
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("the cut inverse has exactly r nonzero rows and the right residuals") {
  for (const std::uint64_t seed : {21u, 22u, 23u}) {
    const InstanceSpec spec{26, 14, 6, 0.5, seed};
    const Mat a = generate(spec);
    const LsState st = local_search(a);
    REQUIRE(st.status == SolveStatus::Optimal);
    const Mat h = build_ah_symmetric(a, st.cols);
    CHECK(nonzero_rows(h, 1e-10) == spec.r);

    const auto res = property_residuals(a, h);
    const double tol = 1e-8 * a.norm();
    CHECK(res[0] <= tol);
    CHECK(res[1] <= tol);
    CHECK(res[2] <= tol);
  }
}

TEST_CASE("local search is deterministic") {
  const Mat a = generate(InstanceSpec{40, 22, 11, 0.5, 31});
  const LsState s1 = local_search(a);
  const LsState s2 = local_search(a);
  CHECK(s1.rows == s2.rows);
  CHECK(s1.cols == s2.cols);
  CHECK(s1.log_absdet == s2.log_absdet);
  CHECK(s1.swaps == s2.swaps);
}
