#pragma once

#include <cstdint>

#include "dense.hpp"

namespace ginv {

// Random low-rank instance: A = B*C with sparse-uniform factors. The rank
// is verified, so downstream code may rely on it exactly.
struct InstanceSpec {
  Index m = 0;
  Index n = 0;
  Index r = 0;
  double density = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

Mat generate(const InstanceSpec& spec);

}  // namespace ginv
