#include "generate.hpp"

#include <string>

#include "errors.hpp"
#include "rng.hpp"
#include "svd.hpp"
#include "tolerances.hpp"

namespace ginv {

namespace {

// Row-major fill, mask first and values second, so the sampled pattern for
// a given seed does not depend on how many entries end up nonzero.
Mat sparse_uniform(Index rows, Index cols, double density, Rng& rng) {
  Mat a(rows, cols);
  std::vector<char> mask(static_cast<std::size_t>(rows * cols));
  for (auto& keep : mask) keep = rng.next_unit() < density ? 1 : 0;
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      const double v = rng.next_unit();
      a(i, j) = mask[static_cast<std::size_t>(i * cols + j)] ? v : 0.0;
    }
  }
  return a;
}

}  // namespace

void InstanceSpec::validate() const {
  if (m <= 0 || n <= 0 || r <= 0) {
    throw Error(ErrorCode::Config, "InstanceSpec: m, n, r must be positive");
  }
  if (r > std::min(m, n)) {
    throw Error(ErrorCode::Config, "InstanceSpec: r must not exceed min(m,n)");
  }
  if (!(density > 0.0) || density > 1.0) {
    throw Error(ErrorCode::Config, "InstanceSpec: density must be in (0, 1]");
  }
}

Mat generate(const InstanceSpec& spec) {
  spec.validate();
  ToleranceConfig tol;
  for (int attempt = 0; attempt < 10; ++attempt) {
    Rng rng(spec.seed + static_cast<std::uint64_t>(attempt));
    const Mat b = sparse_uniform(spec.m, spec.r, spec.density, rng);
    const Mat c = sparse_uniform(spec.r, spec.n, spec.density, rng);
    Mat a = b * c;
    if (a.cwiseAbs().maxCoeff() == 0.0) continue;
    try {
      if (svd(a, tol).rank == spec.r) return a;
    } catch (const Error&) {
      // Degenerate draw; resample.
    }
  }
  throw Error(ErrorCode::Rank,
              "generate: could not reach rank " + std::to_string(spec.r) +
                  " in 10 attempts");
}

}  // namespace ginv
