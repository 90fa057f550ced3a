#include "splitting.hpp"

#include <algorithm>
#include <vector>

#include "errors.hpp"

namespace ginv {

void soft_threshold(Mat& a, double t) {
  a = a.unaryExpr([t](double v) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
  });
}

void row_shrink(Mat& a, double t) {
  for (Index i = 0; i < a.rows(); ++i) {
    const double rho = a.row(i).norm();
    if (rho <= t) {
      a.row(i).setZero();
    } else {
      a.row(i) *= (rho - t) / rho;
    }
  }
}

double ball_21_threshold(const Vec& rho, double radius) {
  std::vector<double> s(rho.data(), rho.data() + rho.size());
  std::sort(s.begin(), s.end(), std::greater<double>());
  double prefix = 0.0;
  double tau = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    prefix += s[k];
    const double cand = (prefix - radius) / static_cast<double>(k + 1);
    if (k + 1 == s.size() || s[k + 1] <= cand) {
      tau = cand;
      break;
    }
  }
  return std::max(tau, 0.0);
}

void project_ball_21(Mat& a, double radius) {
  if (radius < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "project_ball_21: negative radius");
  }
  Vec rho = a.rowwise().norm();
  if (rho.sum() <= radius) return;
  const double tau = ball_21_threshold(rho, radius);
  row_shrink(a, tau);
}

}  // namespace ginv
