#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "dense.hpp"
#include "errors.hpp"
#include "generate.hpp"
#include "mtx_io.hpp"
#include "properties.hpp"
#include "rng.hpp"
#include "svd.hpp"
#include "tolerances.hpp"

using namespace ginv;

namespace {

Mat random_mat(Index m, Index n, std::uint64_t seed) {
  Rng rng(seed);
  Mat a(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = rng.next_range(-3.0, 3.0);
  return a;
}

std::string temp_path(const char* name) {
  return std::string("/tmp/ginv_matcore_") + name;
}

}  // namespace

TEST_CASE("norms and sparsity counts on a hand-built matrix") {
  Mat h(3, 2);
  h << 3.0, -4.0, 0.0, 1e-9, 0.0, 0.0;
  CHECK(norm_1(h) == doctest::Approx(7.0 + 1e-9));
  CHECK(norm_21(h) == doctest::Approx(5.0 + 1e-9));
  CHECK(norm_0(h, 1e-5) == 2);
  CHECK(nonzero_rows(h, 1e-5) == 1);
  // the tiny entry counts once the threshold drops below it
  CHECK(norm_0(h, 1e-12) == 3);
  CHECK(nonzero_rows(h, 1e-12) == 2);

  const Metrics met = compute_metrics(h, 1e-5);
  CHECK(met.nonzero_rows == 1);
  CHECK(met.norm0 == 2);
  CHECK(met.norm1 == doctest::Approx(norm_1(h)));
  CHECK(met.norm21 == doctest::Approx(norm_21(h)));
}

TEST_CASE("require_finite rejects NaN and infinity") {
  Mat a = Mat::Ones(2, 2);
  CHECK_NOTHROW(require_finite(a, "a"));
  a(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(require_finite(a, "a"), Error);
  a(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_WITH_AS(require_finite(a, "a"),
                       doctest::Contains("a"), Error);
}

TEST_CASE("matrix market round trip is exact") {
  const Mat a = random_mat(7, 5, 11);
  std::ostringstream first;
  write_mtx(first, a);
  std::istringstream in(first.str());
  const Mat back = read_mtx(in);
  REQUIRE(back.rows() == a.rows());
  REQUIRE(back.cols() == a.cols());
  CHECK((back.array() == a.array()).all());

  // writing the same matrix twice produces identical bytes
  std::ostringstream second;
  write_mtx(second, a);
  CHECK(first.str() == second.str());
}

TEST_CASE("csv round trip is exact") {
  const Mat a = random_mat(4, 6, 12);
  std::ostringstream out;
  write_csv(out, a);
  std::istringstream in(out.str());
  const Mat back = read_csv(in);
  REQUIRE(back.rows() == a.rows());
  REQUIRE(back.cols() == a.cols());
  CHECK((back.array() == a.array()).all());
}

TEST_CASE("read_matrix dispatches on the extension") {
  const Mat a = random_mat(3, 3, 13);
  const std::string mtx = temp_path("d.mtx");
  const std::string csv = temp_path("d.csv");
  write_matrix(mtx, a);
  write_matrix(csv, a);
  CHECK((read_matrix(mtx).array() == a.array()).all());
  CHECK((read_matrix(csv).array() == a.array()).all());
  std::remove(mtx.c_str());
  std::remove(csv.c_str());
}

TEST_CASE("unreadable and malformed files raise io errors") {
  CHECK_THROWS_AS(read_matrix("/tmp/ginv_matcore_does_not_exist.mtx"), Error);
  try {
    read_matrix("/tmp/ginv_matcore_does_not_exist.mtx");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Io);
  }

  const std::string bad = temp_path("bad.mtx");
  {
    std::ofstream out(bad);
    out << "%%MatrixMarket matrix array real general\n2 2\n1.0\n";  // too few values
  }
  CHECK_THROWS_AS(read_matrix(bad), Error);
  std::remove(bad.c_str());
}

TEST_CASE("coordinate and symmetric matrix market variants read back") {
  std::istringstream in(
      "%%MatrixMarket matrix coordinate real symmetric\n"
      "3 3 4\n"
      "1 1 2.0\n"
      "2 1 -1.0\n"
      "3 3 5.0\n"
      "3 2 0.5\n");
  const Mat a = read_mtx(in);
  REQUIRE(a.rows() == 3);
  REQUIRE(a.cols() == 3);
  CHECK(a(0, 0) == 2.0);
  CHECK(a(1, 0) == -1.0);
  CHECK(a(0, 1) == -1.0);  // mirrored
  CHECK(a(2, 2) == 5.0);
  CHECK(a(1, 2) == 0.5);
  CHECK(a(1, 1) == 0.0);
}

TEST_CASE("property residuals are zero exactly for the pseudoinverse") {
  InstanceSpec spec;
  spec.m = 15;
  spec.n = 9;
  spec.r = 4;
  spec.seed = 21;
  const Mat a = generate(spec);
  const Mat g = mp_pseudoinverse(svd(a));
  const auto res = property_residuals(a, g);
  const double scale = a.norm();
  for (int i = 0; i < 4; ++i) CHECK(res[static_cast<std::size_t>(i)] <= 1e-12 * scale);

  // breaking the inverse breaks the first property measurably
  Mat h = g;
  h(0, 0) += 1.0;
  const auto broken = property_residuals(a, h);
  CHECK(broken[0] > 1e-8 * scale);
}

TEST_CASE("property_residuals validates shapes") {
  const Mat a = Mat::Ones(3, 2);
  const Mat h_bad = Mat::Ones(3, 2);  // must be 2 x 3
  CHECK_THROWS_AS(property_residuals(a, h_bad), Error);
}

TEST_CASE("tolerance configuration validation") {
  ToleranceConfig tol;
  CHECK_NOTHROW(tol.validate());
  CHECK(tol.zero_tol == 1e-5);
  CHECK(tol.residual_tol == 1e-8);

  ToleranceConfig bad = tol;
  bad.zero_tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = tol;
  bad.residual_tol = -1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = tol;
  bad.rank_tol = 1.5;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = tol;
  bad.rank_override = 0;
  CHECK_THROWS_AS(bad.validate(), Error);

  // automatic rank cutoff grows with the larger dimension
  CHECK(tol.effective_rank_tol(10, 4) ==
        10.0 * std::numeric_limits<double>::epsilon());
  bad = tol;
  bad.rank_tol = 1e-3;
  CHECK(bad.effective_rank_tol(10, 4) == 1e-3);
}

TEST_CASE("format_value renders round-trippable text") {
  const double v = 0.1 + 0.2;
  const std::string s = format_value(v);
  CHECK(std::stod(s) == v);
}
