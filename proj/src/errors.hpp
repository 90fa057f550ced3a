#pragma once

#include <stdexcept>
#include <string>

namespace ginv {

enum class ErrorCode {
  InvalidArgument,
  Dimension,
  ZeroMatrix,
  Rank,
  Config,
  SizeCap,
  Io,
  Internal,
};

// Every failure the library raises carries one of the codes above so the C
// wrapper can map it to a stable integer without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::Dimension: return "dimension";
    case ErrorCode::ZeroMatrix: return "zero_matrix";
    case ErrorCode::Rank: return "rank";
    case ErrorCode::Config: return "config";
    case ErrorCode::SizeCap: return "size_cap";
    case ErrorCode::Io: return "io";
    case ErrorCode::Internal: return "internal";
  }
  return "unknown";
}

// Termination state of an iterative or pivoting solve. A deadline expiry
// reports as IterLimit: the result is usable but not certified.
enum class SolveStatus {
  Optimal,
  IterLimit,
  Infeasible,
};

inline const char* solve_status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::IterLimit: return "iter_limit";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

}  // namespace ginv
