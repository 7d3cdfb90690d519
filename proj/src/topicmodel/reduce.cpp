#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "cbcomm/error.hpp"
#include "cbcomm/topicmodel.hpp"
#include "knn.hpp"

namespace cbcomm::topicmodel {

ReductionMethod parse_reduction_method(const std::string& s) {
  if (s == "umap") return ReductionMethod::umap;
  if (s == "svd") return ReductionMethod::svd;
  throw ConfigError(fmt::format("unknown reduction method '{}' (umap|svd)", s));
}

Matrix to_matrix(const embedding::EmbeddingMatrix& m) {
  m.validate();
  Matrix out(static_cast<Eigen::Index>(m.n_rows), static_cast<Eigen::Index>(m.dim));
  for (std::size_t i = 0; i < m.n_rows; ++i)
    for (std::size_t j = 0; j < m.dim; ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m.values[i * m.dim + j];
  return out;
}

namespace {

void check_reduction(const Matrix& data, const ReductionParams& p) {
  if (p.n_neighbors < 2) throw ParameterError("n_neighbors must be >= 2");
  if (p.n_components < 1) throw ParameterError("n_components must be >= 1");
  if (p.n_components >= data.cols())
    throw ParameterError(fmt::format("n_components={} must be below the input dimension {}",
                                     p.n_components, data.cols()));
  if (data.rows() < p.n_neighbors)
    throw ParameterError(fmt::format("{} rows is fewer than n_neighbors={}", data.rows(), p.n_neighbors));
  if (!data.allFinite()) throw ParameterError("input matrix has non-finite values");
}

}  // namespace

Matrix svd_reduce(const Matrix& data, int n_components) {
  const Eigen::Index k = n_components;
  if (k < 1 || k > std::min(data.rows(), data.cols()))
    throw ParameterError(fmt::format("cannot take {} components of a {}x{} matrix", k, data.rows(),
                                     data.cols()));
  const Eigen::RowVectorXd mean = data.colwise().mean();
  const Matrix centered = data.rowwise() - mean;
  Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinV);
  Matrix v = svd.matrixV().leftCols(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    Eigen::Index arg = 0;
    for (Eigen::Index r = 1; r < v.rows(); ++r)
      if (std::abs(v(r, c)) > std::abs(v(arg, c)) + 1e-12) arg = r;
    if (v(arg, c) < 0) v.col(c) = -v.col(c);
  }
  return centered * v;
}

std::pair<double, double> umap_curve_params(double spread, double min_dist) {
  if (spread <= 0 || min_dist < 0 || min_dist > spread)
    throw ParameterError("umap needs spread > 0 and 0 <= min_dist <= spread");
  constexpr int kPoints = 300;
  std::vector<double> xs(kPoints), ys(kPoints);
  for (int i = 0; i < kPoints; ++i) {
    xs[i] = 3.0 * spread * i / (kPoints - 1);
    ys[i] = xs[i] < min_dist ? 1.0 : std::exp(-(xs[i] - min_dist) / spread);
  }
  // Levenberg-Marquardt on the two curve parameters.
  auto residuals = [&](double a, double b, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    r.resize(kPoints);
    if (jac) jac->resize(kPoints, 2);
    for (int i = 0; i < kPoints; ++i) {
      const double x = xs[i];
      const double p = x > 0 ? std::pow(x, 2 * b) : 0.0;
      const double f = 1.0 / (1.0 + a * p);
      r(i) = f - ys[i];
      if (jac) {
        (*jac)(i, 0) = -p * f * f;
        (*jac)(i, 1) = x > 0 ? -a * p * 2.0 * std::log(x) * f * f : 0.0;
      }
    }
  };
  double a = 1.0, b = 1.0, mu = 1e-3;
  Eigen::VectorXd r;
  Eigen::MatrixXd j;
  residuals(a, b, r, &j);
  double cost = r.squaredNorm();
  for (int it = 0; it < 500; ++it) {
    const Eigen::Matrix2d jtj = j.transpose() * j;
    const Eigen::Vector2d g = j.transpose() * r;
    Eigen::Matrix2d damped = jtj;
    damped.diagonal() *= 1.0 + mu;
    const Eigen::Vector2d step = damped.ldlt().solve(-g);
    Eigen::VectorXd r2;
    residuals(a + step(0), b + step(1), r2, nullptr);
    const double cost2 = r2.squaredNorm();
    if (cost2 < cost) {
      a += step(0);
      b += step(1);
      mu = std::max(mu / 10, 1e-12);
      const bool done = cost - cost2 < 1e-15 * std::max(cost, 1e-300);
      cost = cost2;
      residuals(a, b, r, &j);
      if (done || step.norm() < 1e-12) break;
    } else {
      mu *= 10;
      if (mu > 1e12) break;
    }
  }
  return {a, b};
}

namespace {

struct Graph {
  std::vector<int> head, tail;
  std::vector<double> weight;
};

// Fuzzy simplicial set from the kNN graph: per-point smooth distances, then
// probabilistic union of the directed memberships.
Graph fuzzy_graph(const detail::Knn& knn) {
  const int n = static_cast<int>(knn.index.size());
  const int k = static_cast<int>(knn.index[0].size());
  const double target = std::log2(static_cast<double>(k));
  std::vector<std::map<int, double>> rows(n);

  double mean_all = 0;
  for (const auto& d : knn.dist) mean_all += std::accumulate(d.begin(), d.end(), 0.0);
  mean_all /= double(n) * k;

  for (int i = 0; i < n; ++i) {
    const auto& d = knn.dist[i];
    double rho = 0;
    for (int j = 1; j < k; ++j)
      if (d[j] > 0) {
        rho = d[j];
        break;
      }
    double lo = 0, hi = std::numeric_limits<double>::infinity(), sigma = 1.0;
    for (int it = 0; it < 64; ++it) {
      double psum = 0;
      for (int j = 1; j < k; ++j) {
        const double dd = d[j] - rho;
        psum += dd > 0 ? std::exp(-dd / sigma) : 1.0;
      }
      if (std::abs(psum - target) < 1e-5) break;
      if (psum > target) {
        hi = sigma;
        sigma = (lo + hi) / 2;
      } else {
        lo = sigma;
        sigma = std::isinf(hi) ? sigma * 2 : (lo + hi) / 2;
      }
    }
    const double mean_i = std::accumulate(d.begin(), d.end(), 0.0) / k;
    if (rho > 0)
      sigma = std::max(sigma, 1e-3 * mean_i);
    else
      sigma = std::max(sigma, 1e-3 * mean_all);

    for (int j = 0; j < k; ++j) {
      const int nb = knn.index[i][j];
      if (nb == i) continue;
      const double dd = d[j] - rho;
      rows[i][nb] = dd <= 0 ? 1.0 : std::exp(-dd / sigma);
    }
  }

  // Symmetric union; both directions are kept as separate edges.
  std::vector<std::map<int, double>> sym(n);
  for (int i = 0; i < n; ++i)
    for (const auto& [j, w] : rows[i]) {
      auto back = rows[j].find(i);
      const double wt = back == rows[j].end() ? 0.0 : back->second;
      const double u = w + wt - w * wt;
      sym[i][j] = u;
      sym[j][i] = u;
    }
  Graph g;
  for (int i = 0; i < n; ++i)
    for (const auto& [j, u] : sym[i])
      if (u > 0) {
        g.head.push_back(i);
        g.tail.push_back(j);
        g.weight.push_back(u);
      }
  return g;
}

double clip4(double x) { return std::clamp(x, -4.0, 4.0); }

}  // namespace

Matrix umap_reduce(const Matrix& data, const ReductionParams& p) {
  check_reduction(data, p);
  const int n = static_cast<int>(data.rows());
  const int dims = p.n_components;
  const auto knn = detail::exact_knn(data, p.n_neighbors, p.metric == Metric::cosine);
  const auto graph = fuzzy_graph(knn);
  const auto [a, b] = umap_curve_params(p.spread, p.min_dist);

  const int n_epochs = p.n_epochs > 0 ? p.n_epochs : (n <= 10000 ? 500 : 200);
  std::mt19937_64 rng(p.seed);

  // Initial layout: principal components scaled into [-10, 10] plus jitter.
  Matrix emb;
  if (dims <= std::min<Eigen::Index>(data.rows(), data.cols()))
    emb = svd_reduce(data, dims);
  else
    emb = Matrix::Zero(n, dims);
  const double max_abs = emb.cwiseAbs().maxCoeff();
  if (max_abs > 0) emb *= 10.0 / max_abs;
  std::normal_distribution<double> jitter(0.0, 1e-4);
  for (Eigen::Index i = 0; i < emb.size(); ++i) emb.data()[i] += jitter(rng);

  // Edges sampled in proportion to their weight; weak edges never fire.
  const double wmax = *std::max_element(graph.weight.begin(), graph.weight.end());
  std::vector<std::size_t> edges;
  std::vector<double> eps;  // epochs per sample
  for (std::size_t e = 0; e < graph.weight.size(); ++e) {
    if (graph.weight[e] < wmax / n_epochs) continue;
    edges.push_back(e);
    eps.push_back(wmax / graph.weight[e]);
  }
  std::vector<double> next_sample(eps), eps_neg(eps.size()), next_neg(eps.size());
  for (std::size_t e = 0; e < eps.size(); ++e) {
    eps_neg[e] = eps[e] / p.negative_sample_rate;
    next_neg[e] = eps_neg[e];
  }

  std::uniform_int_distribution<int> pick(0, n - 1);
  std::vector<double> diff(dims);
  // Row-major scratch avoids strided access in the inner loop.
  std::vector<double> y(static_cast<std::size_t>(n) * dims);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < dims; ++c) y[std::size_t(i) * dims + c] = emb(i, c);

  for (int epoch = 0; epoch < n_epochs; ++epoch) {
    const double alpha = 1.0 - double(epoch) / n_epochs;
    for (std::size_t s = 0; s < edges.size(); ++s) {
      if (next_sample[s] > epoch) continue;
      const int i = graph.head[edges[s]];
      const int j = graph.tail[edges[s]];
      double* yi = &y[std::size_t(i) * dims];
      double* yj = &y[std::size_t(j) * dims];
      double d2 = 0;
      for (int c = 0; c < dims; ++c) {
        diff[c] = yi[c] - yj[c];
        d2 += diff[c] * diff[c];
      }
      if (d2 > 0) {
        const double coef = -2.0 * a * b * std::pow(d2, b - 1.0) / (1.0 + a * std::pow(d2, b));
        for (int c = 0; c < dims; ++c) {
          const double g = clip4(coef * diff[c]) * alpha;
          yi[c] += g;
          yj[c] -= g;
        }
      }
      next_sample[s] += eps[s];

      const int n_neg = static_cast<int>((epoch - next_neg[s]) / eps_neg[s]);
      for (int q = 0; q < n_neg; ++q) {
        const int k = pick(rng);
        if (k == i) continue;
        const double* yk = &y[std::size_t(k) * dims];
        double nd2 = 0;
        for (int c = 0; c < dims; ++c) {
          diff[c] = yi[c] - yk[c];
          nd2 += diff[c] * diff[c];
        }
        if (nd2 <= 0) continue;
        const double coef = 2.0 * b / ((0.001 + nd2) * (1.0 + a * std::pow(nd2, b)));
        for (int c = 0; c < dims; ++c) yi[c] += clip4(coef * diff[c]) * alpha;
      }
      next_neg[s] += n_neg * eps_neg[s];
    }
  }
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < dims; ++c) emb(i, c) = y[std::size_t(i) * dims + c];
  return emb;
}

Matrix reduce_dims(const Matrix& data, const ReductionParams& p, ReductionMethod method) {
  check_reduction(data, p);
  if (method == ReductionMethod::svd) return svd_reduce(data, p.n_components);
  return umap_reduce(data, p);
}

Matrix reduce_dims(const embedding::EmbeddingMatrix& m, const ReductionParams& p, ReductionMethod method) {
  return reduce_dims(to_matrix(m), p, method);
}

Matrix doc_map_2d(const embedding::EmbeddingMatrix& m, std::uint64_t seed, ReductionMethod method,
                  int n_neighbors) {
  ReductionParams p;
  p.n_components = 2;
  p.n_neighbors = n_neighbors;
  p.seed = seed;
  // Plot coordinates use the library's usual spacing so points do not pile up.
  p.min_dist = 0.1;
  return reduce_dims(m, p, method);
}

}  // namespace cbcomm::topicmodel
