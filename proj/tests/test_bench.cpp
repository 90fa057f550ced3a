#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bench.hpp"
#include "errors.hpp"
#include "generate.hpp"
#include "properties.hpp"

using namespace ginv;

namespace {

std::string strip_times(std::string line) {
  const auto pos = line.rfind("\"solve_time_s\"");
  REQUIRE(pos != std::string::npos);
  line.resize(pos);
  return line;
}

}  // namespace

TEST_CASE("method names round trip") {
  const Method all[] = {Method::P21,      Method::P21L1, Method::P123,
                        Method::P123Full, Method::Ls,    Method::Mp};
  for (Method m : all) {
    CHECK(method_from_name(method_name(m)) == m);
  }
  CHECK(std::string(method_name(Method::P123Full)) == "p123full");
  CHECK_THROWS_AS(method_from_name("p12"), Error);
}

TEST_CASE("reports are recomputed from the stored matrix") {
  const Mat a = generate(InstanceSpec{14, 9, 4, 0.5, 5});
  const BenchConfig cfg;
  for (Method m : {Method::P21, Method::P123, Method::Ls, Method::Mp}) {
    const InverseReport rep = compute_inverse(a, m, cfg);
    REQUIRE(rep.status == "optimal");
    REQUIRE(rep.h.rows() == a.cols());
    REQUIRE(rep.h.cols() == a.rows());

    const Metrics met = compute_metrics(rep.h, cfg.tol.zero_tol);
    CHECK(rep.nzr == met.nonzero_rows);
    CHECK(rep.norm0 == met.norm0);
    CHECK(rep.norm1 == met.norm1);
    CHECK(rep.norm21 == met.norm21);
    const auto res = property_residuals(a, rep.h);
    for (int i = 0; i < 4; ++i) CHECK(rep.residuals[static_cast<std::size_t>(i)] == res[static_cast<std::size_t>(i)]);
    CHECK(res[0] <= 1e-6 * a.norm());
  }
}

TEST_CASE("detected rank lands in the instance block") {
  const Mat a = generate(InstanceSpec{14, 9, 4, 0.5, 5});
  CHECK(compute_inverse(a, Method::Mp).instance.r == 4);
  CHECK(compute_inverse(a, Method::Ls).instance.r == 4);
  CHECK(compute_inverse(a, Method::P123Full).instance.r == -1);
}

TEST_CASE("sparsity pattern across methods on one instance") {
  const InstanceSpec spec{20, 12, 6, 0.5, 9};
  const Mat a = generate(spec);
  const BenchConfig cfg;
  const InverseReport p21 = compute_inverse(a, Method::P21, cfg);
  const InverseReport p123 = compute_inverse(a, Method::P123, cfg);
  const InverseReport ls = compute_inverse(a, Method::Ls, cfg);
  const InverseReport mp = compute_inverse(a, Method::Mp, cfg);

  CHECK(ls.nzr == spec.r);
  CHECK(p21.nzr >= spec.r);
  // each solver wins its own objective
  CHECK(p21.norm21 <= p123.norm21 + 1e-6);
  CHECK(p21.norm21 <= ls.norm21 + 1e-6);
  CHECK(p21.norm21 <= mp.norm21 + 1e-6);
  CHECK(p123.norm1 <= p21.norm1 + 1e-6);
  CHECK(p123.norm1 <= mp.norm1 + 1e-6);
}

TEST_CASE("budgeted cell inherits its budget from the row-sparse solve") {
  const Mat a = generate(InstanceSpec{16, 10, 5, 0.5, 12});
  const InverseReport p21 = compute_inverse(a, Method::P21);
  const InverseReport l1 = compute_inverse(a, Method::P21L1);
  REQUIRE(l1.status == "optimal");
  CHECK(l1.norm21 <= p21.norm21 * (1.0 + 1e-6));
  CHECK(l1.norm1 <= p21.norm1 * (1.0 + 1e-6));

  // an explicit budget overrides; an absurdly small one is infeasible
  const InverseReport tight = compute_inverse(a, Method::P21L1, {}, 1e-6);
  CHECK(tight.status == "infeasible");
}

TEST_CASE("run_cell captures failures as a status instead of throwing") {
  const InstanceSpec spec{12, 8, 4, 0.5, 3};
  const Mat a = generate(spec);
  BenchConfig cfg;
  cfg.solver.full_cap = 10;
  const InverseReport rep = run_cell(a, spec, Method::P123Full, cfg);
  CHECK(rep.status == "error:size_cap");
  CHECK(rep.h.size() == 0);
  CHECK(rep.instance.seed == spec.seed);
}

TEST_CASE("suite order is spec-major regardless of workers") {
  const std::vector<InstanceSpec> specs = {{10, 6, 3, 0.5, 1}, {12, 8, 4, 0.5, 2}};
  const std::vector<Method> methods = {Method::P21, Method::Mp};
  const auto reports = run_suite(specs, methods);
  REQUIRE(reports.size() == 4);
  CHECK(reports[0].method == Method::P21);
  CHECK(reports[0].instance.seed == 1);
  CHECK(reports[1].method == Method::Mp);
  CHECK(reports[1].instance.seed == 1);
  CHECK(reports[2].method == Method::P21);
  CHECK(reports[2].instance.seed == 2);
  CHECK(reports[3].method == Method::Mp);
  CHECK(reports[3].instance.seed == 2);
}

TEST_CASE("worker threads do not change the reports") {
  const std::vector<InstanceSpec> specs = {{12, 8, 4, 0.5, 7}, {14, 9, 4, 0.5, 8}};
  const std::vector<Method> methods = {Method::P21, Method::P123, Method::Ls};

  const auto seq = run_suite(specs, methods);
  setenv("GINV_THREADS", "3", 1);
  const auto par = run_suite(specs, methods);
  unsetenv("GINV_THREADS");

  REQUIRE(seq.size() == par.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    CHECK(seq[i].status == par[i].status);
    CHECK(seq[i].norm1 == par[i].norm1);
    CHECK((seq[i].h.array() == par[i].h.array()).all());
    CHECK(strip_times(report_json(seq[i])) == strip_times(report_json(par[i])));
  }
}

TEST_CASE("one failing cell does not abort the suite") {
  const std::vector<InstanceSpec> specs = {{12, 8, 4, 0.5, 7}};
  BenchConfig cfg;
  cfg.solver.full_cap = 10;
  const auto reports =
      run_suite(specs, {Method::P21, Method::P123Full, Method::Mp}, cfg);
  REQUIRE(reports.size() == 3);
  CHECK(reports[0].status == "optimal");
  CHECK(reports[1].status == "error:size_cap");
  CHECK(reports[2].status == "optimal");
}

TEST_CASE("json lines carry a fixed key order") {
  const InstanceSpec spec{12, 8, 4, 0.5, 7};
  const Mat a = generate(spec);
  const InverseReport rep = run_cell(a, spec, Method::P21);
  const std::string line = report_json(rep);

  const auto obj = nlohmann::ordered_json::parse(line);
  const std::vector<std::string> want = {
      "method", "m",   "n",   "r",   "density", "seed", "status",
      "nzr",    "norm0", "norm1", "norm21", "rp1", "rp2", "rp3",
      "rp4",    "solve_time_s", "total_time_s"};
  std::vector<std::string> got;
  for (auto it = obj.begin(); it != obj.end(); ++it) got.push_back(it.key());
  CHECK(got == want);
  CHECK(obj["method"] == "p21");
  CHECK(obj["m"] == 12);
  CHECK(obj["n"] == 8);
  CHECK(obj["r"] == 4);
  CHECK(obj["seed"] == 7);
  CHECK(obj["status"] == "optimal");

  // without the instance identity the detected rank is still reported
  const auto bare = nlohmann::ordered_json::parse(report_json(rep, false));
  CHECK(!bare.contains("density"));
  CHECK(!bare.contains("seed"));
  CHECK(bare.contains("r"));

  std::ostringstream out;
  write_reports_jsonl(out, {rep, rep});
  std::istringstream in(out.str());
  std::string l1, l2;
  REQUIRE(std::getline(in, l1));
  REQUIRE(std::getline(in, l2));
  CHECK(l1 == line);
}

TEST_CASE("rendered table has a header and one row per report") {
  const std::vector<InstanceSpec> specs = {{10, 6, 3, 0.5, 1}};
  const auto reports = run_suite(specs, {Method::P21, Method::Ls});
  const std::string table = render_report_table(reports);
  CHECK(table.find("method") != std::string::npos);
  CHECK(table.find("norm21") != std::string::npos);
  CHECK(table.find("p21") != std::string::npos);
  CHECK(table.find("ls") != std::string::npos);
  Index lines = 0;
  for (char c : table)
    if (c == '\n') ++lines;
  CHECK(lines == 2 + static_cast<Index>(reports.size()));
}

TEST_CASE("ratio study pairs halves and enforces the rank bound") {
  const std::vector<InstanceSpec> specs = {{12, 8, 4, 0.5, 7}, {16, 10, 5, 0.5, 8}};
  const auto reports = run_suite(specs, {Method::Ls, Method::P123});
  const auto rows = ratio_study(reports);
  REQUIRE(rows.size() == 2);
  for (const auto& row : rows) {
    CHECK(row.ratio == doctest::Approx(row.ls_norm1 / row.p123_norm1));
    CHECK(row.ratio <= static_cast<double>(row.instance.r) * (1.0 + 1e-9));
    CHECK(row.below_heuristic == (row.ratio < 1.6));
  }

  // a lone half is rejected
  std::vector<InverseReport> lonely(reports.begin(), reports.begin() + 1);
  CHECK_THROWS_AS(ratio_study(lonely), Error);

  // duplicated halves are rejected too
  std::vector<InverseReport> dup = reports;
  dup.push_back(reports[0]);
  CHECK_THROWS_AS(ratio_study(dup), Error);
}

TEST_CASE("iteration limits near the deadline are relabeled as timeouts") {
  const InstanceSpec spec{30, 16, 8, 0.5, 4};
  const Mat a = generate(spec);
  BenchConfig cfg;
  cfg.solver.lp_size_cap = 0;  // force the iterative route
  cfg.solver.solver_tol = 1e-16;
  cfg.cell_time_cap_s = 0.002;
  const InverseReport rep = run_cell(a, spec, Method::P123, cfg);
  CHECK(rep.status == "timeout");
}

TEST_CASE("bench configuration validation") {
  BenchConfig cfg;
  cfg.ls.kappa = 0.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = BenchConfig{};
  cfg.cell_time_cap_s = std::nan("");
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = BenchConfig{};
  cfg.solver.relaxation = -0.1;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
