#include "knn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cbcomm::topicmodel::detail {

double euclidean(const Matrix& pts, Eigen::Index i, Eigen::Index j) {
  double s = 0;
  for (Eigen::Index c = 0; c < pts.cols(); ++c) {
    const double d = pts(i, c) - pts(j, c);
    s += d * d;
  }
  return std::sqrt(s);
}

Knn exact_knn(const Matrix& data, int k, bool cosine) {
  const Eigen::Index n = data.rows();
  Matrix x = data;
  if (cosine)
    for (Eigen::Index i = 0; i < n; ++i) {
      const double nrm = x.row(i).norm();
      if (nrm > 0) x.row(i) /= nrm;
    }
  const Eigen::VectorXd sq = x.rowwise().squaredNorm();

  Knn out;
  out.index.assign(n, {});
  out.dist.assign(n, {});
  constexpr Eigen::Index kBlock = 512;
  std::vector<int> order(n);
  std::vector<double> d(n);
  for (Eigen::Index start = 0; start < n; start += kBlock) {
    const Eigen::Index rows = std::min(kBlock, n - start);
    const Matrix gram = x.middleRows(start, rows) * x.transpose();
    for (Eigen::Index r = 0; r < rows; ++r) {
      const Eigen::Index i = start + r;
      for (Eigen::Index j = 0; j < n; ++j) {
        double v = cosine ? 1.0 - gram(r, j) : sq(i) + sq(j) - 2.0 * gram(r, j);
        v = std::max(v, 0.0);
        d[j] = cosine ? v : std::sqrt(v);
      }
      d[i] = -1.0;  // self sorts first
      std::iota(order.begin(), order.end(), 0);
      std::partial_sort(order.begin(), order.begin() + k, order.end(),
                        [&](int a, int b) { return d[a] != d[b] ? d[a] < d[b] : a < b; });
      d[i] = 0.0;
      out.index[i].assign(order.begin(), order.begin() + k);
      for (int q = 0; q < k; ++q) out.dist[i].push_back(d[order[q]]);
    }
  }
  return out;
}

}  // namespace cbcomm::topicmodel::detail
