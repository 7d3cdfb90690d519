#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "cbcomm/econo.hpp"

namespace cbcomm::econo {

namespace {

std::string column_name(const std::vector<std::string>& names, Eigen::Index j) {
  return static_cast<std::size_t>(j) < names.size() ? names[static_cast<std::size_t>(j)]
                                                    : fmt::format("x{}", j);
}

}  // namespace

void check_full_rank(const Matrix& x, const std::vector<std::string>& names) {
  if (x.rows() <= x.cols())
    throw EstimationError(fmt::format("{} observations for {} regressors", x.rows(), x.cols()));
  if (!x.allFinite()) throw EstimationError("design matrix has non-finite entries");
  // Add columns one at a time; a column that the accepted ones reproduce is
  // reported together with the columns it depends on.
  std::vector<Eigen::Index> accepted;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const Vector col = x.col(j);
    const double scale = col.norm();
    if (scale == 0.0) throw EstimationError(fmt::format("column '{}' is identically zero", column_name(names, j)),
                                            {column_name(names, j)});
    if (!accepted.empty()) {
      Matrix a(x.rows(), static_cast<Eigen::Index>(accepted.size()));
      for (std::size_t k = 0; k < accepted.size(); ++k) a.col(static_cast<Eigen::Index>(k)) = x.col(accepted[k]);
      const Vector coef = a.colPivHouseholderQr().solve(col);
      if ((col - a * coef).norm() <= 1e-9 * scale) {
        std::vector<std::string> involved{column_name(names, j)};
        for (std::size_t k = 0; k < accepted.size(); ++k)
          if (std::abs(coef(static_cast<Eigen::Index>(k))) * a.col(static_cast<Eigen::Index>(k)).norm() > 1e-9 * scale)
            involved.push_back(column_name(names, accepted[k]));
        std::string others;
        for (std::size_t k = 1; k < involved.size(); ++k) others += (k > 1 ? ", '" : "'") + involved[k] + "'";
        throw EstimationError(fmt::format("column '{}' is collinear with {}", involved[0], others), involved);
      }
    }
    accepted.push_back(j);
  }
}

OlsResult ols(const Vector& y, const Matrix& x, const std::vector<std::string>& names) {
  if (y.size() != x.rows())
    throw ParameterError(fmt::format("y has {} rows, X has {}", y.size(), x.rows()));
  if (!y.allFinite()) throw EstimationError("response has non-finite entries");
  check_full_rank(x, names);
  OlsResult r;
  r.beta = x.householderQr().solve(y);
  r.residuals = y - x * r.beta;
  return r;
}

Matrix hac_covariance(const Matrix& x, const Vector& u, int lag) {
  if (lag < 0) throw ParameterError("HAC lag must be non-negative");
  if (u.size() != x.rows()) throw ParameterError("residual count does not match X");
  const Eigen::Index n = x.rows(), k = x.cols();
  const Matrix xu = x.array().colwise() * u.array();  // row t = u_t x_t'
  Matrix meat = xu.transpose() * xu;
  for (int l = 1; l <= lag && l < n; ++l) {
    const double w = 1.0 - double(l) / double(lag + 1);
    const Matrix g = xu.bottomRows(n - l).transpose() * xu.topRows(n - l);
    meat += w * (g + g.transpose());
  }
  const Matrix bread = (x.transpose() * x).ldlt().solve(Matrix::Identity(k, k));
  return bread * meat * bread;
}

double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw ParameterError("quantile of an empty sample");
  if (!(q >= 0 && q <= 1)) throw ParameterError("quantile level outside [0, 1]");
  std::sort(xs.begin(), xs.end());
  const double pos = q * double(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, xs.size() - 1);
  const double frac = pos - double(lo);
  return xs[lo] + frac * (xs[hi] - xs[lo]);
}

}  // namespace cbcomm::econo
