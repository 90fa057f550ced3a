#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dense.hpp"
#include "generate.hpp"
#include "local_search.hpp"
#include "solvers.hpp"
#include "tolerances.hpp"

namespace ginv {

enum class Method { P21, P21L1, P123, P123Full, Ls, Mp };

const char* method_name(Method method);
Method method_from_name(const std::string& name);

struct BenchConfig {
  SolverConfig solver;  // time_cap_s <= 0 inherits cell_time_cap_s
  LsConfig ls;
  ToleranceConfig tol;  // zero_tol drives nzr / norm0
  double cell_time_cap_s = 300.0;

  void validate() const;
};

// One benchmark cell. The four norms and the sparsity counts are always
// recomputed from `h`, never copied out of the solver, so the stored matrix
// and the summary numbers cannot drift apart.
struct InverseReport {
  Method method = Method::Mp;
  InstanceSpec instance;
  Index nzr = 0;
  Index norm0 = 0;
  double norm1 = 0.0;
  double norm21 = 0.0;
  std::array<double, 4> residuals{{0.0, 0.0, 0.0, 0.0}};
  double solve_time_s = 0.0;  // optimization only
  double total_time_s = 0.0;  // factorization + solve + assembly
  std::string status;         // optimal | iter_limit | infeasible | timeout | error:<code>
  Mat h;
};

// Computes the requested inverse of `a` and fills in a report, letting
// solver errors propagate. The instance block of the result records the
// detected rank (or -1 when the method never forms a factorization) with
// unit density and seed zero. Unless z_budget overrides it, the budgeted
// method derives its budget from a fresh row-sparse solve of the same
// instance, which is included in the solve time.
InverseReport compute_inverse(const Mat& a, Method method, const BenchConfig& cfg = {},
                              std::optional<double> z_budget = std::nullopt);

// compute_inverse under the instance's identity, with failures surfacing
// as status "error:<code>" and an empty matrix rather than an exception,
// so one bad cell cannot abort a whole suite.
InverseReport run_cell(const Mat& a, const InstanceSpec& instance, Method method,
                       const BenchConfig& cfg = {});

// Full grid, one report per (spec, method) pair in exactly that order.
// Cells are independent and may run on up to GINV_THREADS worker threads;
// the schedule never affects the report order or contents.
std::vector<InverseReport> run_suite(const std::vector<InstanceSpec>& specs,
                                     const std::vector<Method>& methods,
                                     const BenchConfig& cfg = {});

struct RatioRow {
  InstanceSpec instance;
  double ls_norm1 = 0.0;
  double p123_norm1 = 0.0;
  double ratio = 0.0;
  bool below_heuristic = false;  // ratio < 1.6, typical but not guaranteed
};

// Pairs up the local-search and entrywise reports per instance and returns
// norm1(LS) / norm1(P123) for each. An instance carrying only one half of
// the pair is an error, as is an LS/P123 report that did not converge.
// The hard bound ratio <= r is enforced here; the 1.6 heuristic is only
// recorded.
std::vector<RatioRow> ratio_study(const std::vector<InverseReport>& reports);

// One report as a single-line JSON object with a fixed key order. The
// instance identity fields (r, density, seed) are included only when
// with_instance is set; a detected rank still appears without it.
std::string report_json(const InverseReport& rep, bool with_instance = true);

// One JSON object per line, fixed key order, 17 significant digits.
void write_reports_jsonl(std::ostream& out, const std::vector<InverseReport>& reports);

// Fixed-width text table, one row per report.
std::string render_report_table(const std::vector<InverseReport>& reports);

}  // namespace ginv
