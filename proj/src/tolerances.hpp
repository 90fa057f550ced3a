#pragma once

#include <cmath>
#include <limits>

#include "dense.hpp"
#include "errors.hpp"

namespace ginv {

// Shared numerical thresholds. rank_tol is relative to the largest singular
// value; a negative value selects the default max(m,n)*eps. rank_override
// (when >= 1) bypasses the threshold entirely, for callers that know the
// rank of the instance they generated.
struct ToleranceConfig {
  double rank_tol = -1.0;
  double zero_tol = 1e-5;
  double residual_tol = 1e-8;
  Index rank_override = -1;

  double effective_rank_tol(Index m, Index n) const {
    if (rank_tol >= 0.0) return rank_tol;
    return static_cast<double>(std::max(m, n)) *
           std::numeric_limits<double>::epsilon();
  }

  void validate() const {
    if (!(zero_tol > 0.0) || !std::isfinite(zero_tol)) {
      throw Error(ErrorCode::Config, "zero_tol must be positive and finite");
    }
    if (!(residual_tol > 0.0) || !std::isfinite(residual_tol)) {
      throw Error(ErrorCode::Config,
                  "residual_tol must be positive and finite");
    }
    if (rank_tol >= 0.0 && (!(rank_tol < 1.0) || !std::isfinite(rank_tol))) {
      throw Error(ErrorCode::Config, "rank_tol must lie in [0, 1)");
    }
    if (rank_override == 0) {
      throw Error(ErrorCode::Config, "rank_override must be >= 1 when set");
    }
  }
};

}  // namespace ginv
