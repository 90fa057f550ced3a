// ginv: sparse generalized inverses from the command line.
//
// Exit codes: 0 success, 2 bad invocation or bad data, 3 solver did not
// converge, 4 file I/O failure. Diagnostics go to standard error; results
// (matrices, reports, tables) go to files or standard output.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "ginv/ginv.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNoConverge = 3;
constexpr int kExitIo = 4;

struct MatHandle {
  ginv_matrix* p = nullptr;
  ~MatHandle() { ginv_matrix_free(p); }
};

struct OptsHandle {
  ginv_options* p = nullptr;
  ~OptsHandle() { ginv_options_free(p); }
};

struct ReportHandle {
  ginv_report* p = nullptr;
  ~ReportHandle() { ginv_report_free(p); }
};

struct CStr {
  char* p = nullptr;
  ~CStr() { ginv_string_free(p); }
};

int exit_code_for(ginv_status st) {
  if (st == GINV_OK) return kExitOk;
  if (st == GINV_ERR_IO) return kExitIo;
  if (st == GINV_ERR_INTERNAL) return kExitNoConverge;
  return kExitUsage;
}

int report_failure(ginv_status st) {
  std::fprintf(stderr, "ginv: %s: %s\n", ginv_status_name(st), ginv_last_error());
  return exit_code_for(st);
}

// Options are carried as key/value strings and handed to the library
// verbatim, so defaults and range checks live in exactly one place.
using KvFlags = std::vector<std::pair<std::string, std::string>>;

void add_flag(CLI::App* cmd, KvFlags& kv, const std::string& flag,
              const std::string& key, const std::string& help) {
  cmd->add_option_function<std::string>(
      flag, [&kv, key](const std::string& v) { kv.emplace_back(key, v); }, help);
}

void add_tolerance_flags(CLI::App* cmd, KvFlags& kv) {
  add_flag(cmd, kv, "--zero-tol", "zero_tol",
           "threshold below which entries count as zero (default 1e-5)");
  add_flag(cmd, kv, "--rank-tol", "rank_tol",
           "singular value cutoff, negative selects the automatic rule");
  add_flag(cmd, kv, "--residual-tol", "residual_tol",
           "property verification tolerance (default 1e-8)");
  add_flag(cmd, kv, "--rank-override", "rank_override", "force the working rank");
}

void add_solver_flags(CLI::App* cmd, KvFlags& kv) {
  add_flag(cmd, kv, "--max-iters", "max_iters", "iteration cap for the solvers");
  add_flag(cmd, kv, "--solver-tol", "solver_tol",
           "relative optimality gap target (default 1e-8)");
  add_flag(cmd, kv, "--gamma-scale", "gamma_scale", "proximal step multiplier");
  add_flag(cmd, kv, "--relaxation", "relaxation", "splitting relaxation in (0,2)");
  add_flag(cmd, kv, "--budget-delta", "budget_delta", "relative budget slack");
  add_flag(cmd, kv, "--solver-seed", "seed", "solver seed (reserved)");
  add_flag(cmd, kv, "--time-cap", "time_cap_s", "per-solve wall clock cap, seconds");
  add_flag(cmd, kv, "--lp-size-cap", "lp_size_cap",
           "largest n*m + dim(Z) solved by the exact LP route");
  add_flag(cmd, kv, "--full-cap", "full_cap",
           "largest n*m accepted by the unreduced route");
  add_flag(cmd, kv, "--trace", "trace_path", "write per-iteration CSV here");
}

void add_ls_flags(CLI::App* cmd, KvFlags& kv) {
  add_flag(cmd, kv, "--ls-kappa", "ls_kappa",
           "minimum determinant growth accepted per swap");
  add_flag(cmd, kv, "--ls-max-swaps", "ls_max_swaps", "swap cap for the local search");
  add_flag(cmd, kv, "--ls-refresh-every", "ls_refresh_every",
           "rebuild cadence of the cached inverse");
  add_flag(cmd, kv, "--ls-trace", "ls_trace_path", "write per-swap CSV here");
}

// Returns 0 or a process exit code.
int build_options(const KvFlags& kv, OptsHandle& opts) {
  ginv_status st = ginv_options_create(&opts.p);
  if (st != GINV_OK) return report_failure(st);
  for (const auto& [key, value] : kv) {
    st = ginv_options_set(opts.p, key.c_str(), value.c_str());
    if (st != GINV_OK) return report_failure(st);
  }
  return 0;
}

bool parse_size_triple(const std::string& text, ginv_instance& spec) {
  long long m = 0, n = 0, r = 0;
  int consumed = -1;
  if (std::sscanf(text.c_str(), "%lldx%lldx%lld%n", &m, &n, &r, &consumed) != 3 ||
      consumed != static_cast<int>(text.size())) {
    return false;
  }
  spec.m = m;
  spec.n = n;
  spec.r = r;
  return true;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string::size_type pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto end = comma == std::string::npos ? text.size() : comma;
    if (end > pos) out.push_back(text.substr(pos, end - pos));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

int parse_specs(const std::string& sizes, double density, std::uint64_t seed,
                std::vector<ginv_instance>& specs) {
  const auto tokens = split_list(sizes);
  if (tokens.empty()) {
    std::fprintf(stderr, "ginv: --sizes needs at least one mxnxr triple\n");
    return kExitUsage;
  }
  specs.clear();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    ginv_instance spec{};
    if (!parse_size_triple(tokens[i], spec)) {
      std::fprintf(stderr, "ginv: bad size triple \"%s\" (want mxnxr)\n",
                   tokens[i].c_str());
      return kExitUsage;
    }
    spec.density = density;
    spec.seed = seed + i;
    specs.push_back(spec);
  }
  return 0;
}

int write_text_file(const std::string& path, const char* text) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (f == nullptr) {
    std::fprintf(stderr, "ginv: cannot open %s for writing\n", path.c_str());
    return kExitIo;
  }
  const bool ok = std::fputs(text, f) >= 0;
  if (std::fclose(f) != 0 || !ok) {
    std::fprintf(stderr, "ginv: write to %s failed\n", path.c_str());
    return kExitIo;
  }
  return 0;
}

int run_gen(const std::string& size, double density, std::uint64_t seed,
            const std::string& out_path) {
  ginv_instance spec{};
  if (!parse_size_triple(size, spec)) {
    std::fprintf(stderr, "ginv: bad --size \"%s\" (want mxnxr)\n", size.c_str());
    return kExitUsage;
  }
  spec.density = density;
  spec.seed = seed;
  MatHandle a;
  ginv_status st = ginv_generate(&spec, &a.p);
  if (st != GINV_OK) return report_failure(st);
  st = ginv_matrix_write(out_path.c_str(), a.p);
  if (st != GINV_OK) return report_failure(st);
  return 0;
}

int run_solve(const std::string& in_path, const std::string& method,
              const std::string& out_path, const std::string& report_path,
              const KvFlags& kv) {
  OptsHandle opts;
  if (const int rc = build_options(kv, opts)) return rc;
  MatHandle a;
  ginv_status st = ginv_matrix_read(in_path.c_str(), &a.p);
  if (st != GINV_OK) return report_failure(st);

  MatHandle h;
  ReportHandle rep;
  st = ginv_solve(a.p, method.c_str(), opts.p, &h.p, &rep.p);
  if (st != GINV_OK) return report_failure(st);

  if (!out_path.empty()) {
    st = ginv_matrix_write(out_path.c_str(), h.p);
    if (st != GINV_OK) return report_failure(st);
  }
  CStr json;
  st = ginv_report_json(rep.p, &json.p);
  if (st != GINV_OK) return report_failure(st);
  if (!report_path.empty()) {
    std::string payload(json.p);
    payload += '\n';
    if (const int rc = write_text_file(report_path, payload.c_str())) return rc;
  }
  std::printf("%s\n", json.p);

  const char* status = ginv_report_status(rep.p);
  if (std::strcmp(status, "optimal") != 0) {
    std::fprintf(stderr, "ginv: solver finished with status %s\n", status);
    return kExitNoConverge;
  }
  return 0;
}

int run_check(const std::string& a_path, const std::string& h_path) {
  MatHandle a, h;
  ginv_status st = ginv_matrix_read(a_path.c_str(), &a.p);
  if (st != GINV_OK) return report_failure(st);
  st = ginv_matrix_read(h_path.c_str(), &h.p);
  if (st != GINV_OK) return report_failure(st);

  double res[4] = {0, 0, 0, 0};
  st = ginv_check(a.p, h.p, res);
  if (st != GINV_OK) return report_failure(st);
  double norm_a = 0.0;
  st = ginv_matrix_norm_fro(a.p, &norm_a);
  if (st != GINV_OK) return report_failure(st);

  const double scale = norm_a > 0.0 ? norm_a : 1.0;
  std::printf(
      "{\"rp1\":%.17g,\"rp2\":%.17g,\"rp3\":%.17g,\"rp4\":%.17g,"
      "\"norm_a\":%.17g,\"rp1_rel\":%.17g,\"rp2_rel\":%.17g,"
      "\"rp3_rel\":%.17g,\"rp4_rel\":%.17g}\n",
      res[0], res[1], res[2], res[3], norm_a, res[0] / scale, res[1] / scale,
      res[2] / scale, res[3] / scale);
  return 0;
}

int run_export(const std::string& in_path, const std::string& kind,
               const std::string& out_path, const KvFlags& kv) {
  OptsHandle opts;
  if (const int rc = build_options(kv, opts)) return rc;
  MatHandle a;
  ginv_status st = ginv_matrix_read(in_path.c_str(), &a.p);
  if (st != GINV_OK) return report_failure(st);
  st = ginv_export_lp(a.p, kind.c_str(), opts.p, out_path.c_str());
  if (st != GINV_OK) return report_failure(st);
  return 0;
}

int run_bench(const std::string& sizes, const std::string& methods, double density,
              std::uint64_t seed, const std::string& jsonl_path,
              const KvFlags& kv) {
  std::vector<ginv_instance> specs;
  if (const int rc = parse_specs(sizes, density, seed, specs)) return rc;
  const auto method_names = split_list(methods);
  if (method_names.empty()) {
    std::fprintf(stderr, "ginv: --methods needs at least one method\n");
    return kExitUsage;
  }
  std::vector<const char*> method_ptrs;
  method_ptrs.reserve(method_names.size());
  for (const auto& name : method_names) method_ptrs.push_back(name.c_str());

  OptsHandle opts;
  if (const int rc = build_options(kv, opts)) return rc;

  CStr table, jsonl;
  const ginv_status st = ginv_bench(
      specs.data(), static_cast<int64_t>(specs.size()), method_ptrs.data(),
      static_cast<int64_t>(method_ptrs.size()), opts.p, &table.p,
      jsonl_path.empty() ? nullptr : &jsonl.p);
  if (st != GINV_OK) return report_failure(st);
  if (!jsonl_path.empty()) {
    if (const int rc = write_text_file(jsonl_path, jsonl.p)) return rc;
  }
  std::fputs(table.p, stdout);
  return 0;
}

int run_ratio(const std::string& sizes, double density, std::uint64_t seed,
              const KvFlags& kv) {
  std::vector<ginv_instance> specs;
  if (const int rc = parse_specs(sizes, density, seed, specs)) return rc;
  OptsHandle opts;
  if (const int rc = build_options(kv, opts)) return rc;
  CStr text;
  const ginv_status st =
      ginv_ratio(specs.data(), static_cast<int64_t>(specs.size()), opts.p, &text.p);
  if (st != GINV_OK) return report_failure(st);
  std::fputs(text.p, stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse and row-sparse generalized inverses"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ginv_version());

  // gen
  auto* gen = app.add_subcommand("gen", "generate a random low-rank instance");
  std::string gen_size;
  double gen_density = 0.5;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  gen->add_option("--size", gen_size, "instance shape as mxnxr, e.g. 40x20x10")
      ->required();
  gen->add_option("--density", gen_density, "factor density in (0,1] (default 0.5)");
  gen->add_option("--seed", gen_seed, "random seed (default 1)");
  gen->add_option("-o,--output", gen_out, "matrix output path (.mtx or .csv)")
      ->required();

  // solve
  auto* solve = app.add_subcommand("solve", "compute a generalized inverse");
  std::string solve_in, solve_method, solve_out, solve_report;
  KvFlags solve_kv;
  solve->add_option("-i,--input", solve_in, "input matrix path")->required();
  solve
      ->add_option("--method", solve_method,
                   "one of p21, p21l1, p123, p123full, ls, mp")
      ->required();
  solve->add_option("-o,--output", solve_out, "write the inverse here");
  solve->add_option("--report", solve_report, "write the JSON report here");
  add_flag(solve, solve_kv, "--z-budget", "z_budget",
           "row-sparsity budget for p21l1 (default: its own p21 optimum)");
  add_tolerance_flags(solve, solve_kv);
  add_solver_flags(solve, solve_kv);
  add_ls_flags(solve, solve_kv);

  // check
  auto* check = app.add_subcommand("check", "residuals of the four properties");
  std::string check_a, check_h;
  check->add_option("-i,--input", check_a, "matrix A")->required();
  check->add_option("-H,--inverse", check_h, "candidate inverse H")->required();

  // export-lp
  auto* exp = app.add_subcommand("export-lp", "write the entrywise LP as MPS");
  std::string exp_in, exp_kind = "p123", exp_out;
  KvFlags exp_kv;
  exp->add_option("-i,--input", exp_in, "input matrix path")->required();
  exp->add_option("--kind", exp_kind, "problem kind (default p123)");
  exp->add_option("-o,--output", exp_out, "MPS output path")->required();
  add_flag(exp, exp_kv, "--z-budget", "z_budget", "budget, for budgeted kinds");
  add_tolerance_flags(exp, exp_kv);

  // bench
  auto* bench = app.add_subcommand("bench", "run a suite and print the table");
  std::string bench_sizes, bench_methods, bench_jsonl;
  double bench_density = 0.5;
  std::uint64_t bench_seed = 1;
  KvFlags bench_kv;
  bench
      ->add_option("--sizes", bench_sizes,
                   "comma list of mxnxr triples, e.g. 40x20x10,80x40x20")
      ->required();
  bench->add_option("--methods", bench_methods, "comma list of methods")->required();
  bench->add_option("--density", bench_density, "factor density (default 0.5)");
  bench->add_option("--seed", bench_seed,
                    "base seed; instance k uses seed+k (default 1)");
  bench->add_option("--jsonl", bench_jsonl, "also write one JSON object per cell");
  add_flag(bench, bench_kv, "--cell-time-cap", "cell_time_cap_s",
           "per-cell wall clock cap in seconds (default 300)");
  add_tolerance_flags(bench, bench_kv);
  add_solver_flags(bench, bench_kv);
  add_ls_flags(bench, bench_kv);

  // ratio
  auto* ratio = app.add_subcommand(
      "ratio", "norm1(ls) / norm1(p123) per instance");
  std::string ratio_sizes;
  double ratio_density = 0.5;
  std::uint64_t ratio_seed = 1;
  KvFlags ratio_kv;
  ratio->add_option("--sizes", ratio_sizes, "comma list of mxnxr triples")
      ->required();
  ratio->add_option("--density", ratio_density, "factor density (default 0.5)");
  ratio->add_option("--seed", ratio_seed,
                    "base seed; instance k uses seed+k (default 1)");
  add_tolerance_flags(ratio, ratio_kv);
  add_solver_flags(ratio, ratio_kv);
  add_ls_flags(ratio, ratio_kv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  if (gen->parsed()) return run_gen(gen_size, gen_density, gen_seed, gen_out);
  if (solve->parsed())
    return run_solve(solve_in, solve_method, solve_out, solve_report, solve_kv);
  if (check->parsed()) return run_check(check_a, check_h);
  if (exp->parsed()) return run_export(exp_in, exp_kind, exp_out, exp_kv);
  if (bench->parsed())
    return run_bench(bench_sizes, bench_methods, bench_density, bench_seed,
                     bench_jsonl, bench_kv);
  if (ratio->parsed()) return run_ratio(ratio_sizes, ratio_density, ratio_seed, ratio_kv);
  return kExitUsage;
}
