#include "mtx_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "errors.hpp"

namespace ginv {

namespace {

[[noreturn]] void io_fail(const std::string& msg) {
  throw Error(ErrorCode::Io, msg);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool next_content_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const auto pos = line.find_first_not_of(" \t\r\n");
    if (pos == std::string::npos) continue;
    if (line[pos] == '%') continue;
    return true;
  }
  return false;
}

double parse_double(const std::string& tok, const char* where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) io_fail(std::string(where) + ": bad number '" + tok + "'");
    return v;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    io_fail(std::string(where) + ": bad number '" + tok + "'");
  }
}

}  // namespace

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Mat read_mtx(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) io_fail("mtx: empty stream");
  std::istringstream hs(header);
  std::string banner, object, format, field, symmetry;
  hs >> banner >> object >> format >> field >> symmetry;
  if (lower(banner) != "%%matrixmarket" || lower(object) != "matrix") {
    io_fail("mtx: missing MatrixMarket matrix banner");
  }
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (format != "array" && format != "coordinate") {
    io_fail("mtx: unsupported format '" + format + "'");
  }
  if (field != "real" && field != "integer") {
    io_fail("mtx: unsupported field '" + field + "'");
  }
  if (symmetry != "general" && symmetry != "symmetric") {
    io_fail("mtx: unsupported symmetry '" + symmetry + "'");
  }

  std::string line;
  if (!next_content_line(in, line)) io_fail("mtx: missing size line");
  std::istringstream ss(line);

  if (format == "array") {
    long long m = 0, n = 0;
    if (!(ss >> m >> n) || m <= 0 || n <= 0) io_fail("mtx: bad array size line");
    if (symmetry == "symmetric" && m != n) {
      io_fail("mtx: symmetric matrix must be square");
    }
    Mat a(m, n);
    auto read_entry = [&]() {
      std::string tok;
      if (!next_content_line(in, tok)) io_fail("mtx: truncated array data");
      std::istringstream ts(tok);
      std::string val, extra;
      ts >> val;
      if (ts >> extra) io_fail("mtx: trailing token on array line");
      return parse_double(val, "mtx");
    };
    // Array data is stored column by column; the symmetric variant holds
    // only the lower triangle.
    for (Index j = 0; j < a.cols(); ++j) {
      for (Index i = (symmetry == "symmetric") ? j : 0; i < a.rows(); ++i) {
        a(i, j) = read_entry();
        if (symmetry == "symmetric") a(j, i) = a(i, j);
      }
    }
    return a;
  }

  long long m = 0, n = 0, nnz = 0;
  if (!(ss >> m >> n >> nnz) || m <= 0 || n <= 0 || nnz < 0) {
    io_fail("mtx: bad coordinate size line");
  }
  Mat a = Mat::Zero(m, n);
  for (long long e = 0; e < nnz; ++e) {
    if (!next_content_line(in, line)) io_fail("mtx: truncated coordinate data");
    std::istringstream es(line);
    long long i = 0, j = 0;
    std::string val;
    if (!(es >> i >> j >> val)) io_fail("mtx: bad coordinate entry");
    if (i < 1 || i > m || j < 1 || j > n) io_fail("mtx: coordinate out of range");
    const double v = parse_double(val, "mtx");
    a(i - 1, j - 1) = v;
    if (symmetry == "symmetric" && i != j) a(j - 1, i - 1) = v;
  }
  return a;
}

void write_mtx(std::ostream& out, const Mat& a) {
  out << "%%MatrixMarket matrix array real general\n";
  out << a.rows() << " " << a.cols() << "\n";
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      out << format_value(a(i, j)) << "\n";
    }
  }
  if (!out) io_fail("mtx: write failed");
}

Mat read_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::vector<double> row;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) {
      const auto b = cell.find_first_not_of(" \t\r");
      const auto e = cell.find_last_not_of(" \t\r");
      if (b == std::string::npos) io_fail("csv: empty cell");
      row.push_back(parse_double(cell.substr(b, e - b + 1), "csv"));
    }
    if (row.empty()) io_fail("csv: empty row");
    if (!rows.empty() && row.size() != rows.front().size()) {
      io_fail("csv: ragged rows");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) io_fail("csv: no data");
  Mat a(static_cast<Index>(rows.size()), static_cast<Index>(rows[0].size()));
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      a(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return a;
}

void write_csv(std::ostream& out, const Mat& a) {
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      if (j) out << ",";
      out << format_value(a(i, j));
    }
    out << "\n";
  }
  if (!out) io_fail("csv: write failed");
}

namespace {

bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         lower(s.substr(s.size() - suffix.size())) == suffix;
}

}  // namespace

Mat read_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) io_fail("cannot open '" + path + "' for reading");
  Mat a = has_suffix(path, ".csv") ? read_csv(in) : read_mtx(in);
  require_finite(a, "read_matrix");
  return a;
}

void write_matrix(const std::string& path, const Mat& a) {
  std::ofstream out(path);
  if (!out) io_fail("cannot open '" + path + "' for writing");
  if (has_suffix(path, ".csv")) {
    write_csv(out, a);
  } else {
    write_mtx(out, a);
  }
  out.flush();
  if (!out) io_fail("write to '" + path + "' failed");
}

}  // namespace ginv
