#include "bench.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <thread>
#include <tuple>

#include "json.hpp"

#include "errors.hpp"
#include "properties.hpp"
#include "reduced.hpp"
#include "svd.hpp"

namespace ginv {

namespace {

constexpr Method kAllMethods[] = {Method::P21,      Method::P21L1, Method::P123,
                                  Method::P123Full, Method::Ls,    Method::Mp};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Index thread_cap() {
  const char* env = std::getenv("GINV_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1) return 1;
  return static_cast<Index>(std::min<long>(v, 64));
}

}  // namespace

const char* method_name(Method method) {
  switch (method) {
    case Method::P21: return "p21";
    case Method::P21L1: return "p21l1";
    case Method::P123: return "p123";
    case Method::P123Full: return "p123full";
    case Method::Ls: return "ls";
    case Method::Mp: return "mp";
  }
  return "?";
}

Method method_from_name(const std::string& name) {
  for (const Method m : kAllMethods) {
    if (name == method_name(m)) return m;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown method: \"" + name + "\"");
}

void BenchConfig::validate() const {
  solver.validate();
  ls.validate();
  tol.validate();
  if (std::isnan(cell_time_cap_s)) {
    throw Error(ErrorCode::Config, "cell_time_cap_s must not be NaN");
  }
}

InverseReport compute_inverse(const Mat& a, Method method, const BenchConfig& cfg,
                              std::optional<double> z_budget) {
  cfg.validate();
  require_finite(a, "matrix");

  InverseReport rep;
  rep.method = method;
  rep.instance = InstanceSpec{a.rows(), a.cols(), -1, 1.0, 0};

  SolverConfig scfg = cfg.solver;
  if (scfg.time_cap_s <= 0.0) scfg.time_cap_s = cfg.cell_time_cap_s;

  const auto t0 = Clock::now();
  SolveStatus status = SolveStatus::Optimal;
  switch (method) {
    case Method::Mp: {
      const SvdFactors f = svd(a, cfg.tol);
      rep.instance.r = f.rank;
      rep.h = mp_pseudoinverse(f);
      rep.solve_time_s = seconds_since(t0);
      break;
    }
    case Method::P21: {
      const auto f = std::make_shared<const SvdFactors>(svd(a, cfg.tol));
      rep.instance.r = f->rank;
      const Solution sol = solve_p21(build(ProblemKind::P21, f), scfg);
      rep.h = sol.H;
      rep.solve_time_s = sol.solve_time_s;
      status = sol.status;
      break;
    }
    case Method::P123: {
      const auto f = std::make_shared<const SvdFactors>(svd(a, cfg.tol));
      rep.instance.r = f->rank;
      const Solution sol = solve_p123(build(ProblemKind::P123, f), scfg);
      rep.h = sol.H;
      rep.solve_time_s = sol.solve_time_s;
      status = sol.status;
      break;
    }
    case Method::P21L1: {
      // Default budget = the optimal row-sparse value for this instance, so
      // the run reproduces "sparsest rows, then sparsest entries".
      const auto f = std::make_shared<const SvdFactors>(svd(a, cfg.tol));
      rep.instance.r = f->rank;
      double budget;
      if (z_budget.has_value()) {
        budget = *z_budget;
      } else {
        const Solution base = solve_p21(build(ProblemKind::P21, f), scfg);
        rep.solve_time_s += base.solve_time_s;
        budget = base.objective;
      }
      const Solution sol = solve_p21_l1(build(ProblemKind::P21L1, f, budget), scfg);
      rep.h = sol.H;
      rep.solve_time_s += sol.solve_time_s;
      status = sol.status;
      break;
    }
    case Method::P123Full: {
      const Solution sol = solve_p123_full(a, scfg);
      rep.h = sol.H;
      rep.solve_time_s = sol.solve_time_s;
      status = sol.status;
      break;
    }
    case Method::Ls: {
      const auto ls0 = Clock::now();
      const LsState state = local_search(a, cfg.ls);
      rep.instance.r = static_cast<Index>(state.rows.size());
      rep.h = build_ah_symmetric(a, state.cols);
      rep.solve_time_s = seconds_since(ls0);
      status = state.status;
      break;
    }
  }

  rep.status = solve_status_name(status);
  if (status == SolveStatus::IterLimit && scfg.time_cap_s > 0.0 &&
      rep.solve_time_s >= 0.99 * scfg.time_cap_s) {
    rep.status = "timeout";
  }

  const Metrics met = compute_metrics(rep.h, cfg.tol.zero_tol);
  rep.nzr = met.nonzero_rows;
  rep.norm0 = met.norm0;
  rep.norm1 = met.norm1;
  rep.norm21 = met.norm21;
  rep.residuals = property_residuals(a, rep.h);
  rep.total_time_s = seconds_since(t0);
  return rep;
}

InverseReport run_cell(const Mat& a, const InstanceSpec& instance, Method method,
                       const BenchConfig& cfg) {
  const auto t0 = Clock::now();
  try {
    InverseReport rep = compute_inverse(a, method, cfg);
    rep.instance = instance;
    return rep;
  } catch (const Error& e) {
    InverseReport rep;
    rep.method = method;
    rep.instance = instance;
    rep.status = std::string("error:") + error_code_name(e.code());
    rep.total_time_s = seconds_since(t0);
    return rep;
  }
}

std::vector<InverseReport> run_suite(const std::vector<InstanceSpec>& specs,
                                     const std::vector<Method>& methods,
                                     const BenchConfig& cfg) {
  cfg.validate();
  if (specs.empty()) throw Error(ErrorCode::InvalidArgument, "run_suite: no instances");
  if (methods.empty()) throw Error(ErrorCode::InvalidArgument, "run_suite: no methods");
  for (const auto& spec : specs) spec.validate();

  std::vector<Mat> instances;
  instances.reserve(specs.size());
  for (const auto& spec : specs) instances.push_back(generate(spec));

  const std::size_t cells = specs.size() * methods.size();
  std::vector<InverseReport> reports(cells);
  const auto work = [&](std::size_t idx) {
    const std::size_t si = idx / methods.size();
    const std::size_t mi = idx % methods.size();
    reports[idx] = run_cell(instances[si], specs[si], methods[mi], cfg);
  };

  const Index workers = std::min<Index>(thread_cap(), static_cast<Index>(cells));
  if (workers <= 1) {
    for (std::size_t i = 0; i < cells; ++i) work(i);
    return reports;
  }

  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (Index w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= cells) return;
        try {
          work(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(err_mu);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return reports;
}

std::vector<RatioRow> ratio_study(const std::vector<InverseReport>& reports) {
  using Key = std::tuple<Index, Index, Index, double, std::uint64_t>;
  struct Halves {
    const InverseReport* ls = nullptr;
    const InverseReport* p123 = nullptr;
  };
  std::map<Key, Halves> by_instance;
  std::vector<Key> order;

  for (const auto& rep : reports) {
    if (rep.method != Method::Ls && rep.method != Method::P123) continue;
    const Key key{rep.instance.m, rep.instance.n, rep.instance.r,
                  rep.instance.density, rep.instance.seed};
    auto [it, inserted] = by_instance.try_emplace(key);
    if (inserted) order.push_back(key);
    const InverseReport*& slot =
        rep.method == Method::Ls ? it->second.ls : it->second.p123;
    if (slot != nullptr) {
      throw Error(ErrorCode::InvalidArgument,
                  "ratio_study: duplicate report for one instance and method");
    }
    slot = &rep;
  }
  if (order.empty()) {
    throw Error(ErrorCode::InvalidArgument, "ratio_study: no ls/p123 reports");
  }

  std::vector<RatioRow> rows;
  rows.reserve(order.size());
  for (const Key& key : order) {
    const Halves& halves = by_instance.at(key);
    if (halves.ls == nullptr || halves.p123 == nullptr) {
      throw Error(ErrorCode::InvalidArgument,
                  "ratio_study: instance is missing its ls or p123 counterpart");
    }
    for (const InverseReport* rep : {halves.ls, halves.p123}) {
      if (rep->status != "optimal") {
        throw Error(ErrorCode::InvalidArgument,
                    std::string("ratio_study: ") + method_name(rep->method) +
                        " report has status " + rep->status);
      }
    }
    RatioRow row;
    row.instance = halves.ls->instance;
    row.ls_norm1 = halves.ls->norm1;
    row.p123_norm1 = halves.p123->norm1;
    if (!(row.p123_norm1 > 0.0)) {
      throw Error(ErrorCode::InvalidArgument,
                  "ratio_study: p123 norm is zero, ratio undefined");
    }
    row.ratio = row.ls_norm1 / row.p123_norm1;
    row.below_heuristic = row.ratio < 1.6;
    const double bound = static_cast<double>(row.instance.r) * (1.0 + 1e-9);
    if (row.ratio > bound) {
      throw Error(ErrorCode::Internal,
                  "ratio_study: norm1(LS)/norm1(P123) exceeds the rank bound");
    }
    rows.push_back(row);
  }
  return rows;
}

std::string report_json(const InverseReport& rep, bool with_instance) {
  nlohmann::ordered_json j;
  j["method"] = method_name(rep.method);
  j["m"] = rep.instance.m;
  j["n"] = rep.instance.n;
  if (with_instance) {
    j["r"] = rep.instance.r;
    j["density"] = rep.instance.density;
    j["seed"] = rep.instance.seed;
  } else if (rep.instance.r >= 0) {
    j["r"] = rep.instance.r;
  }
  j["status"] = rep.status;
  j["nzr"] = rep.nzr;
  j["norm0"] = rep.norm0;
  j["norm1"] = rep.norm1;
  j["norm21"] = rep.norm21;
  j["rp1"] = rep.residuals[0];
  j["rp2"] = rep.residuals[1];
  j["rp3"] = rep.residuals[2];
  j["rp4"] = rep.residuals[3];
  j["solve_time_s"] = rep.solve_time_s;
  j["total_time_s"] = rep.total_time_s;
  return j.dump();
}

void write_reports_jsonl(std::ostream& out, const std::vector<InverseReport>& reports) {
  for (const auto& rep : reports) out << report_json(rep, true) << '\n';
}

std::string render_report_table(const std::vector<InverseReport>& reports) {
  std::string out;
  char line[512];
  std::snprintf(line, sizeof line,
                "%-9s %5s %5s %4s %8s %5s %6s %12s %12s %9s %9s %9s %9s %9s %9s  %s\n",
                "method", "m", "n", "r", "seed", "nzr", "norm0", "norm1", "norm21",
                "rP1", "rP2", "rP3", "rP4", "solve_s", "total_s", "status");
  out += line;
  out.append(std::strlen(line) + 6, '-');
  out += '\n';
  for (const auto& rep : reports) {
    std::snprintf(line, sizeof line,
                  "%-9s %5lld %5lld %4lld %8llu %5lld %6lld %12.4f %12.4f %9.1e "
                  "%9.1e %9.1e %9.1e %9.3f %9.3f  %s\n",
                  method_name(rep.method), static_cast<long long>(rep.instance.m),
                  static_cast<long long>(rep.instance.n),
                  static_cast<long long>(rep.instance.r),
                  static_cast<unsigned long long>(rep.instance.seed),
                  static_cast<long long>(rep.nzr), static_cast<long long>(rep.norm0),
                  rep.norm1, rep.norm21, rep.residuals[0], rep.residuals[1],
                  rep.residuals[2], rep.residuals[3], rep.solve_time_s,
                  rep.total_time_s, rep.status.c_str());
    out += line;
  }
  return out;
}

}  // namespace ginv
