#include "mps.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <ostream>

namespace ginv {

namespace {

// Most precise %g rendering that fits the 12-character MPS value field.
std::string mps_number(double v) {
  char buf[48];
  for (int prec = 12; prec >= 1; --prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strlen(buf) <= 12) return buf;
  }
  return buf;
}

std::string row_name(char kind, Index k) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "R%c%06lld", kind,
                static_cast<long long>(k + 1));
  return buf;
}

std::string col_name(char kind, Index k) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%c%07lld", kind,
                static_cast<long long>(k + 1));
  return buf;
}

// Accumulates COLUMNS/RHS entries two per line, per the fixed layout
// (fields at columns 5, 15, 25, 40, 50).
class EntryWriter {
 public:
  explicit EntryWriter(std::ostream& out) : out_(out) {}

  void add(const std::string& col, const std::string& row, double value) {
    if (pending_ && pending_col_ == col) {
      emit_line(col, pending_row_, pending_val_, &row, value);
      pending_ = false;
      return;
    }
    flush();
    pending_ = true;
    pending_col_ = col;
    pending_row_ = row;
    pending_val_ = value;
  }

  void flush() {
    if (!pending_) return;
    emit_line(pending_col_, pending_row_, pending_val_, nullptr, 0.0);
    pending_ = false;
  }

 private:
  void emit_line(const std::string& col, const std::string& row1, double v1,
                 const std::string* row2, double v2) {
    char buf[128];
    if (row2) {
      std::snprintf(buf, sizeof(buf), "    %-8s  %-8s  %-12s   %-8s  %s",
                    col.c_str(), row1.c_str(), mps_number(v1).c_str(),
                    row2->c_str(), mps_number(v2).c_str());
    } else {
      std::snprintf(buf, sizeof(buf), "    %-8s  %-8s  %s", col.c_str(),
                    row1.c_str(), mps_number(v1).c_str());
    }
    out_ << buf << "\n";
  }

  std::ostream& out_;
  bool pending_ = false;
  std::string pending_col_, pending_row_;
  double pending_val_ = 0.0;
};

}  // namespace

void export_lp(const ReducedProblem& problem, std::ostream& out) {
  if (problem.kind != ProblemKind::P123) {
    throw Error(ErrorCode::Config, "export_lp: only the P123 program exports");
  }
  const SvdFactors& f = *problem.factors;
  const Index n = f.cols();
  const Index m = f.rows();
  const Index r = f.rank;
  const Index nm = n * m;
  const Index zr = n - r;

  const Mat v2 = f.V2();
  const Mat u1 = f.U1();

  out << "NAME          SPARSEGI\n";
  out << "ROWS\n";
  out << " N  COST\n";
  for (Index k = 0; k < nm; ++k) out << " G  " << row_name('P', k) << "\n";
  for (Index k = 0; k < nm; ++k) out << " G  " << row_name('M', k) << "\n";

  out << "COLUMNS\n";
  EntryWriter w(out);
  for (Index k = 0; k < nm; ++k) {
    const std::string name = col_name('F', k);
    w.add(name, "COST", 1.0);
    w.add(name, row_name('P', k), 1.0);
    w.add(name, row_name('M', k), 1.0);
  }
  for (Index a = 0; a < zr; ++a) {
    for (Index b = 0; b < r; ++b) {
      const std::string name = col_name('Z', a * r + b);
      for (Index i = 0; i < n; ++i) {
        const double va = v2(i, a);
        for (Index j = 0; j < m; ++j) {
          const double coef = va * u1(j, b);
          if (std::abs(coef) < 1e-13) continue;
          const Index k = i * m + j;
          w.add(name, row_name('P', k), -coef);
          w.add(name, row_name('M', k), coef);
        }
      }
    }
  }
  w.flush();

  out << "RHS\n";
  EntryWriter rhs(out);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < m; ++j) {
      const Index k = i * m + j;
      const double g = f.G(i, j);
      if (g != 0.0) {
        rhs.add("RHS", row_name('P', k), g);
        rhs.add("RHS", row_name('M', k), -g);
      }
    }
  }
  rhs.flush();

  out << "BOUNDS\n";
  for (Index q = 0; q < zr * r; ++q) {
    out << " FR BND       " << col_name('Z', q) << "\n";
  }
  out << "ENDATA\n";
  if (!out) throw Error(ErrorCode::Io, "export_lp: write failed");
}

void export_lp(const ReducedProblem& problem, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::Io, "export_lp: cannot open '" + path + "'");
  }
  export_lp(problem, out);
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "export_lp: write to '" + path + "' failed");
}

}  // namespace ginv
