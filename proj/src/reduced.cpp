#include "reduced.hpp"

#include <cmath>

namespace ginv {

const char* problem_kind_name(ProblemKind k) {
  switch (k) {
    case ProblemKind::P21: return "p21";
    case ProblemKind::P21L1: return "p21l1";
    case ProblemKind::P123: return "p123";
  }
  return "unknown";
}

ReducedProblem build(ProblemKind kind, std::shared_ptr<const SvdFactors> factors,
                     std::optional<double> z_budget) {
  if (!factors) {
    throw Error(ErrorCode::InvalidArgument, "build: factors must be set");
  }
  ReducedProblem p;
  p.kind = kind;
  p.factors = std::move(factors);
  if (kind == ProblemKind::P21L1) {
    if (!z_budget) {
      throw Error(ErrorCode::Config, "build: P21L1 requires z_budget");
    }
    if (!std::isfinite(*z_budget) || *z_budget <= 0.0) {
      throw Error(ErrorCode::Config,
                  "build: z_budget must be finite and positive");
    }
    p.z_budget = *z_budget;
  } else if (z_budget) {
    throw Error(ErrorCode::Config,
                "build: z_budget only applies to P21L1");
  }
  return p;
}

double objective_p21(const SvdFactors& f, const Mat& z) {
  if (z.rows() != f.cols() - f.rank || z.cols() != f.rank) {
    throw Error(ErrorCode::Dimension, "objective_p21: Z shape mismatch");
  }
  Mat m = f.V1() * f.dinv().asDiagonal();
  if (z.size() > 0) m += f.V2() * z;
  return m.rowwise().norm().sum();
}

double objective_p1(const SvdFactors& f, const Mat& z) {
  return norm_1(h_from_z(f, z));
}

}  // namespace ginv
