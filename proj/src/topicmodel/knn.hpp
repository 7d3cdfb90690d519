#pragma once

#include <vector>

#include "cbcomm/topicmodel.hpp"

namespace cbcomm::topicmodel::detail {

// Brute-force k nearest neighbours; each row lists the point itself first
// (distance 0), then neighbours by (distance, index).
struct Knn {
  std::vector<std::vector<int>> index;
  std::vector<std::vector<double>> dist;
};

Knn exact_knn(const Matrix& data, int k, bool cosine);

// Euclidean distance with a fixed summation order so that results do not
// depend on row order.
double euclidean(const Matrix& pts, Eigen::Index i, Eigen::Index j);

}  // namespace cbcomm::topicmodel::detail
