#include "ginv/ginv.h"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bench.hpp"
#include "dense.hpp"
#include "errors.hpp"
#include "generate.hpp"
#include "mps.hpp"
#include "mtx_io.hpp"
#include "properties.hpp"
#include "reduced.hpp"
#include "svd.hpp"

struct ginv_matrix {
  ginv::Mat a;
};

struct ginv_options {
  ginv::BenchConfig cfg;
  std::optional<double> z_budget;
};

struct ginv_report {
  ginv::InverseReport rep;
  bool with_instance = false;
};

namespace {

thread_local std::string tl_error;

ginv_status status_from(ginv::ErrorCode code) {
  switch (code) {
    case ginv::ErrorCode::InvalidArgument: return GINV_ERR_INVALID_ARGUMENT;
    case ginv::ErrorCode::Dimension: return GINV_ERR_DIMENSION;
    case ginv::ErrorCode::ZeroMatrix: return GINV_ERR_ZERO_MATRIX;
    case ginv::ErrorCode::Rank: return GINV_ERR_RANK;
    case ginv::ErrorCode::Config: return GINV_ERR_CONFIG;
    case ginv::ErrorCode::SizeCap: return GINV_ERR_SIZE_CAP;
    case ginv::ErrorCode::Io: return GINV_ERR_IO;
    case ginv::ErrorCode::Internal: return GINV_ERR_INTERNAL;
  }
  return GINV_ERR_INTERNAL;
}

ginv_status fail_invalid(const char* msg) {
  tl_error = msg;
  return GINV_ERR_INVALID_ARGUMENT;
}

// Runs the body with the library's exceptions translated to status codes.
template <typename Fn>
ginv_status wrap(Fn&& fn) {
  tl_error.clear();
  try {
    fn();
    return GINV_OK;
  } catch (const ginv::Error& e) {
    tl_error = e.what();
    return status_from(e.code());
  } catch (const std::bad_alloc&) {
    tl_error = "out of memory";
    return GINV_ERR_NOMEM;
  } catch (const std::exception& e) {
    tl_error = e.what();
    return GINV_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p == nullptr) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

double parse_double(const std::string& key, const char* v) {
  char* end = nullptr;
  const double x = std::strtod(v, &end);
  if (end == v || *end != '\0') {
    throw ginv::Error(ginv::ErrorCode::InvalidArgument,
                      "option " + key + ": not a number: \"" + v + "\"");
  }
  return x;
}

long long parse_int(const std::string& key, const char* v) {
  char* end = nullptr;
  const long long x = std::strtoll(v, &end, 10);
  if (end == v || *end != '\0') {
    throw ginv::Error(ginv::ErrorCode::InvalidArgument,
                      "option " + key + ": not an integer: \"" + v + "\"");
  }
  return x;
}

unsigned long long parse_uint(const std::string& key, const char* v) {
  char* end = nullptr;
  const unsigned long long x = std::strtoull(v, &end, 10);
  if (end == v || *end != '\0' || *v == '-') {
    throw ginv::Error(ginv::ErrorCode::InvalidArgument,
                      "option " + key + ": not an unsigned integer: \"" + v + "\"");
  }
  return x;
}

ginv::InstanceSpec to_spec(const ginv_instance& s) {
  ginv::InstanceSpec spec;
  spec.m = static_cast<ginv::Index>(s.m);
  spec.n = static_cast<ginv::Index>(s.n);
  spec.r = static_cast<ginv::Index>(s.r);
  spec.density = s.density;
  spec.seed = s.seed;
  return spec;
}

const ginv::BenchConfig& config_of(const ginv_options* opts) {
  static const ginv::BenchConfig defaults;
  return opts != nullptr ? opts->cfg : defaults;
}

using RowMajorMap = Eigen::Map<
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstRowMajorMap = Eigen::Map<
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

}  // namespace

extern "C" {

const char* ginv_version(void) { return "0.1.0"; }

const char* ginv_status_name(ginv_status status) {
  switch (status) {
    case GINV_OK: return "ok";
    case GINV_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case GINV_ERR_DIMENSION: return "dimension";
    case GINV_ERR_ZERO_MATRIX: return "zero_matrix";
    case GINV_ERR_RANK: return "rank";
    case GINV_ERR_CONFIG: return "config";
    case GINV_ERR_SIZE_CAP: return "size_cap";
    case GINV_ERR_IO: return "io";
    case GINV_ERR_INTERNAL: return "internal";
    case GINV_ERR_NOMEM: return "nomem";
  }
  return "unknown";
}

const char* ginv_last_error(void) { return tl_error.c_str(); }

void ginv_string_free(char* s) { std::free(s); }

ginv_status ginv_matrix_create(int64_t rows, int64_t cols, const double* row_major,
                               ginv_matrix** out) {
  if (out == nullptr) return fail_invalid("ginv_matrix_create: out is null");
  if (rows < 1 || cols < 1 || rows > (int64_t{1} << 30) || cols > (int64_t{1} << 30)) {
    return fail_invalid("ginv_matrix_create: dimensions out of range");
  }
  return wrap([&] {
    auto m = std::make_unique<ginv_matrix>();
    if (row_major != nullptr) {
      m->a = ConstRowMajorMap(row_major, rows, cols);
      ginv::require_finite(m->a, "matrix data");
    } else {
      m->a = ginv::Mat::Zero(rows, cols);
    }
    *out = m.release();
  });
}

void ginv_matrix_free(ginv_matrix* a) { delete a; }

int64_t ginv_matrix_rows(const ginv_matrix* a) {
  return a == nullptr ? -1 : static_cast<int64_t>(a->a.rows());
}

int64_t ginv_matrix_cols(const ginv_matrix* a) {
  return a == nullptr ? -1 : static_cast<int64_t>(a->a.cols());
}

ginv_status ginv_matrix_copy_data(const ginv_matrix* a, double* out) {
  if (a == nullptr || out == nullptr) {
    return fail_invalid("ginv_matrix_copy_data: null argument");
  }
  return wrap([&] { RowMajorMap(out, a->a.rows(), a->a.cols()) = a->a; });
}

ginv_status ginv_matrix_norm_fro(const ginv_matrix* a, double* out) {
  if (a == nullptr || out == nullptr) {
    return fail_invalid("ginv_matrix_norm_fro: null argument");
  }
  return wrap([&] { *out = a->a.norm(); });
}

ginv_status ginv_matrix_read(const char* path, ginv_matrix** out) {
  if (path == nullptr || out == nullptr) {
    return fail_invalid("ginv_matrix_read: null argument");
  }
  return wrap([&] {
    auto m = std::make_unique<ginv_matrix>();
    m->a = ginv::read_matrix(path);
    *out = m.release();
  });
}

ginv_status ginv_matrix_write(const char* path, const ginv_matrix* a) {
  if (path == nullptr || a == nullptr) {
    return fail_invalid("ginv_matrix_write: null argument");
  }
  return wrap([&] { ginv::write_matrix(path, a->a); });
}

ginv_status ginv_generate(const ginv_instance* spec, ginv_matrix** out) {
  if (spec == nullptr || out == nullptr) {
    return fail_invalid("ginv_generate: null argument");
  }
  return wrap([&] {
    auto m = std::make_unique<ginv_matrix>();
    m->a = ginv::generate(to_spec(*spec));
    *out = m.release();
  });
}

ginv_status ginv_options_create(ginv_options** out) {
  if (out == nullptr) return fail_invalid("ginv_options_create: out is null");
  return wrap([&] { *out = new ginv_options(); });
}

void ginv_options_free(ginv_options* opts) { delete opts; }

ginv_status ginv_options_set(ginv_options* opts, const char* key, const char* value) {
  if (opts == nullptr || key == nullptr || value == nullptr) {
    return fail_invalid("ginv_options_set: null argument");
  }
  return wrap([&] {
    const std::string k = key;
    auto& cfg = opts->cfg;
    if (k == "rank_tol") cfg.tol.rank_tol = parse_double(k, value);
    else if (k == "zero_tol") cfg.tol.zero_tol = parse_double(k, value);
    else if (k == "residual_tol") cfg.tol.residual_tol = parse_double(k, value);
    else if (k == "rank_override") cfg.tol.rank_override = static_cast<ginv::Index>(parse_int(k, value));
    else if (k == "max_iters") cfg.solver.max_iters = static_cast<ginv::Index>(parse_int(k, value));
    else if (k == "solver_tol") cfg.solver.solver_tol = parse_double(k, value);
    else if (k == "gamma_scale") cfg.solver.gamma_scale = parse_double(k, value);
    else if (k == "relaxation") cfg.solver.relaxation = parse_double(k, value);
    else if (k == "budget_delta") cfg.solver.budget_delta = parse_double(k, value);
    else if (k == "seed") cfg.solver.seed = parse_uint(k, value);
    else if (k == "time_cap_s") cfg.solver.time_cap_s = parse_double(k, value);
    else if (k == "lp_size_cap") cfg.solver.lp_size_cap = static_cast<ginv::Index>(parse_int(k, value));
    else if (k == "full_cap") cfg.solver.full_cap = static_cast<ginv::Index>(parse_int(k, value));
    else if (k == "trace_path") cfg.solver.trace_path = value;
    else if (k == "ls_kappa") cfg.ls.kappa = parse_double(k, value);
    else if (k == "ls_max_swaps") cfg.ls.max_swaps = static_cast<ginv::Index>(parse_int(k, value));
    else if (k == "ls_refresh_every") cfg.ls.refresh_every = static_cast<ginv::Index>(parse_int(k, value));
    else if (k == "ls_seed") cfg.ls.seed = static_cast<unsigned>(parse_uint(k, value));
    else if (k == "ls_trace_path") cfg.ls.trace_path = value;
    else if (k == "cell_time_cap_s") cfg.cell_time_cap_s = parse_double(k, value);
    else if (k == "z_budget") opts->z_budget = parse_double(k, value);
    else {
      throw ginv::Error(ginv::ErrorCode::InvalidArgument,
                        "unknown option key: \"" + k + "\"");
    }
  });
}

ginv_status ginv_solve(const ginv_matrix* a, const char* method,
                       const ginv_options* opts, ginv_matrix** h_out,
                       ginv_report** report_out) {
  if (a == nullptr || method == nullptr) {
    return fail_invalid("ginv_solve: null argument");
  }
  return wrap([&] {
    const ginv::Method m = ginv::method_from_name(method);
    const std::optional<double> budget =
        opts != nullptr ? opts->z_budget : std::nullopt;
    ginv::InverseReport rep = ginv::compute_inverse(a->a, m, config_of(opts), budget);
    if (h_out != nullptr) {
      auto h = std::make_unique<ginv_matrix>();
      h->a = rep.h;
      *h_out = h.release();
    }
    if (report_out != nullptr) {
      auto r = std::make_unique<ginv_report>();
      r->rep = std::move(rep);
      r->with_instance = false;
      *report_out = r.release();
    }
  });
}

ginv_status ginv_rank(const ginv_matrix* a, const ginv_options* opts, int64_t* out) {
  if (a == nullptr || out == nullptr) return fail_invalid("ginv_rank: null argument");
  return wrap([&] {
    *out = static_cast<int64_t>(ginv::svd(a->a, config_of(opts).tol).rank);
  });
}

ginv_status ginv_check(const ginv_matrix* a, const ginv_matrix* h,
                       double residuals_out[4]) {
  if (a == nullptr || h == nullptr || residuals_out == nullptr) {
    return fail_invalid("ginv_check: null argument");
  }
  return wrap([&] {
    const auto res = ginv::property_residuals(a->a, h->a);
    for (int i = 0; i < 4; ++i) residuals_out[i] = res[static_cast<std::size_t>(i)];
  });
}

ginv_status ginv_export_lp(const ginv_matrix* a, const char* kind,
                           const ginv_options* opts, const char* path) {
  if (a == nullptr || kind == nullptr || path == nullptr) {
    return fail_invalid("ginv_export_lp: null argument");
  }
  return wrap([&] {
    const std::string k = kind;
    ginv::ProblemKind pk;
    if (k == ginv::problem_kind_name(ginv::ProblemKind::P21)) {
      pk = ginv::ProblemKind::P21;
    } else if (k == ginv::problem_kind_name(ginv::ProblemKind::P21L1)) {
      pk = ginv::ProblemKind::P21L1;
    } else if (k == ginv::problem_kind_name(ginv::ProblemKind::P123)) {
      pk = ginv::ProblemKind::P123;
    } else {
      throw ginv::Error(ginv::ErrorCode::InvalidArgument,
                        "unknown problem kind: \"" + k + "\"");
    }
    const auto& cfg = config_of(opts);
    const auto f = std::make_shared<const ginv::SvdFactors>(ginv::svd(a->a, cfg.tol));
    const std::optional<double> budget =
        opts != nullptr ? opts->z_budget : std::nullopt;
    ginv::export_lp(ginv::build(pk, f, budget), path);
  });
}

void ginv_report_free(ginv_report* rep) { delete rep; }

const char* ginv_report_status(const ginv_report* rep) {
  return rep == nullptr ? "" : rep->rep.status.c_str();
}

const char* ginv_report_method(const ginv_report* rep) {
  return rep == nullptr ? "" : ginv::method_name(rep->rep.method);
}

ginv_status ginv_report_metric(const ginv_report* rep, const char* name, double* out) {
  if (rep == nullptr || name == nullptr || out == nullptr) {
    return fail_invalid("ginv_report_metric: null argument");
  }
  tl_error.clear();
  const std::string k = name;
  const ginv::InverseReport& r = rep->rep;
  if (k == "m") *out = static_cast<double>(r.instance.m);
  else if (k == "n") *out = static_cast<double>(r.instance.n);
  else if (k == "r") *out = static_cast<double>(r.instance.r);
  else if (k == "nzr") *out = static_cast<double>(r.nzr);
  else if (k == "norm0") *out = static_cast<double>(r.norm0);
  else if (k == "norm1") *out = r.norm1;
  else if (k == "norm21") *out = r.norm21;
  else if (k == "rp1") *out = r.residuals[0];
  else if (k == "rp2") *out = r.residuals[1];
  else if (k == "rp3") *out = r.residuals[2];
  else if (k == "rp4") *out = r.residuals[3];
  else if (k == "solve_time_s") *out = r.solve_time_s;
  else if (k == "total_time_s") *out = r.total_time_s;
  else {
    tl_error = "unknown report metric: \"" + k + "\"";
    return GINV_ERR_INVALID_ARGUMENT;
  }
  return GINV_OK;
}

ginv_status ginv_report_json(const ginv_report* rep, char** out) {
  if (rep == nullptr || out == nullptr) {
    return fail_invalid("ginv_report_json: null argument");
  }
  return wrap([&] { *out = dup_string(ginv::report_json(rep->rep, rep->with_instance)); });
}

ginv_status ginv_bench(const ginv_instance* specs, int64_t n_specs,
                       const char* const* methods, int64_t n_methods,
                       const ginv_options* opts, char** table_out, char** jsonl_out) {
  if (specs == nullptr || n_specs < 1 || methods == nullptr || n_methods < 1) {
    return fail_invalid("ginv_bench: need at least one instance and one method");
  }
  return wrap([&] {
    std::vector<ginv::InstanceSpec> sv;
    sv.reserve(static_cast<std::size_t>(n_specs));
    for (int64_t i = 0; i < n_specs; ++i) sv.push_back(to_spec(specs[i]));
    std::vector<ginv::Method> mv;
    mv.reserve(static_cast<std::size_t>(n_methods));
    for (int64_t i = 0; i < n_methods; ++i) {
      if (methods[i] == nullptr) {
        throw ginv::Error(ginv::ErrorCode::InvalidArgument, "ginv_bench: null method");
      }
      mv.push_back(ginv::method_from_name(methods[i]));
    }
    const auto reports = ginv::run_suite(sv, mv, config_of(opts));
    if (table_out != nullptr) *table_out = dup_string(ginv::render_report_table(reports));
    if (jsonl_out != nullptr) {
      std::ostringstream js;
      ginv::write_reports_jsonl(js, reports);
      *jsonl_out = dup_string(js.str());
    }
  });
}

ginv_status ginv_ratio(const ginv_instance* specs, int64_t n_specs,
                       const ginv_options* opts, char** text_out) {
  if (specs == nullptr || n_specs < 1 || text_out == nullptr) {
    return fail_invalid("ginv_ratio: null argument");
  }
  return wrap([&] {
    std::vector<ginv::InstanceSpec> sv;
    sv.reserve(static_cast<std::size_t>(n_specs));
    for (int64_t i = 0; i < n_specs; ++i) sv.push_back(to_spec(specs[i]));
    const std::vector<ginv::Method> mv{ginv::Method::Ls, ginv::Method::P123};
    const auto reports = ginv::run_suite(sv, mv, config_of(opts));
    const auto rows = ginv::ratio_study(reports);

    std::string text;
    char line[256];
    std::snprintf(line, sizeof line, "%6s %6s %5s %10s %12s %12s %9s  %s\n", "m", "n",
                  "r", "seed", "norm1_ls", "norm1_p123", "ratio", "below_1.6");
    text += line;
    double worst = 0.0;
    for (const auto& row : rows) {
      std::snprintf(line, sizeof line, "%6lld %6lld %5lld %10llu %12.4f %12.4f %9.4f  %s\n",
                    static_cast<long long>(row.instance.m),
                    static_cast<long long>(row.instance.n),
                    static_cast<long long>(row.instance.r),
                    static_cast<unsigned long long>(row.instance.seed), row.ls_norm1,
                    row.p123_norm1, row.ratio, row.below_heuristic ? "yes" : "no");
      text += line;
      worst = std::max(worst, row.ratio);
    }
    std::snprintf(line, sizeof line,
                  "max ratio %.4f over %lld instance(s); rank bound respected\n", worst,
                  static_cast<long long>(rows.size()));
    text += line;
    *text_out = dup_string(text);
  });
}

}  // extern "C"
