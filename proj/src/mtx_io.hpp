#pragma once

#include <iosfwd>
#include <string>

#include "dense.hpp"

namespace ginv {

// Matrix Market exchange format. Reading accepts `array` and `coordinate`
// variants (real or integer, general or symmetric); writing always emits a
// dense `array real general` section. Values are written with 17 significant
// digits so a write/read round trip is bit exact.
Mat read_mtx(std::istream& in);
void write_mtx(std::ostream& out, const Mat& a);

// Plain CSV, one matrix row per line.
Mat read_csv(std::istream& in);
void write_csv(std::ostream& out, const Mat& a);

// Dispatch on the file extension: ".csv" is CSV, everything else is
// treated as Matrix Market. Throws Error(Io) on unreadable files or
// malformed content.
Mat read_matrix(const std::string& path);
void write_matrix(const std::string& path, const Mat& a);

// 17 significant digit rendering used by every text emitter.
std::string format_value(double v);

}  // namespace ginv
