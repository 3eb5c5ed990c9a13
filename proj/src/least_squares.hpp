#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "synthreg/register.hpp"

namespace synthreg::detail {

struct LeastSquares {
  Eigen::VectorXd coef;
  Eigen::VectorXd residuals;
  double ssr = 0.0;
};

// Names of columns that make the design rank deficient, in pivot order.
inline std::vector<std::string> collinear_columns(const Eigen::MatrixXd& x, const std::vector<std::string>& names) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  std::vector<std::string> out;
  const auto perm = qr.colsPermutation().indices();
  for (Eigen::Index k = qr.rank(); k < x.cols(); ++k) out.push_back(names[static_cast<std::size_t>(perm(k))]);
  return out;
}

// Same question answered on the column-normalized Gram matrix; cheap for
// tall designs.
inline std::vector<std::string> collinear_columns_tall(const Eigen::MatrixXd& x,
                                                       const std::vector<std::string>& names) {
  const auto p = x.cols();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
  gram = gram.selfadjointView<Eigen::Lower>();
  Eigen::VectorXd scale = gram.diagonal().cwiseSqrt();
  std::vector<std::string> out;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (scale(j) == 0.0) {
      out.push_back(names[static_cast<std::size_t>(j)]);
      scale(j) = 1.0;
    }
  }
  if (!out.empty()) return out;
  const Eigen::MatrixXd corr = scale.cwiseInverse().asDiagonal() * gram * scale.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(corr);
  qr.setThreshold(1e-11);
  const auto perm = qr.colsPermutation().indices();
  for (Eigen::Index k = qr.rank(); k < p; ++k) out.push_back(names[static_cast<std::size_t>(perm(k))]);
  return out;
}

inline std::string join(const std::vector<std::string>& parts) {
  std::string s;
  for (const auto& p : parts) {
    if (!s.empty()) s += ", ";
    s += p;
  }
  return s;
}

// QR least squares; throws NumericalError naming collinear columns.
inline LeastSquares least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                  const std::vector<std::string>& names, const std::string& context) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < x.cols()) {
    throw NumericalError(
        fmt::format("{}: rank-deficient design (collinear: {})", context, join(collinear_columns(x, names))));
  }
  LeastSquares ls;
  ls.coef = qr.solve(y);
  ls.residuals = y - x * ls.coef;
  ls.ssr = ls.residuals.squaredNorm();
  return ls;
}

}  // namespace synthreg::detail
