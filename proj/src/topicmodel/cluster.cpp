#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "cbcomm/error.hpp"
#include "cbcomm/topicmodel.hpp"
#include "knn.hpp"

namespace cbcomm::topicmodel {

ClusterMethod parse_cluster_method(const std::string& s) {
  if (s == "hdbscan") return ClusterMethod::hdbscan;
  if (s == "leader") return ClusterMethod::leader;
  throw ConfigError(fmt::format("unknown cluster method '{}' (hdbscan|leader)", s));
}

int scaled_min_cluster_size(int configured, std::size_t n_corpus, std::size_t reference_size) {
  if (reference_size == 0 || n_corpus >= reference_size) return configured;
  const double scaled = std::round(double(configured) * double(n_corpus) / double(reference_size));
  return std::max(5, static_cast<int>(scaled));
}

namespace {

void check_points(const Matrix& pts, int min_cluster_size) {
  if (min_cluster_size < 2) throw ParameterError("min_cluster_size must be >= 2");
  if (!pts.allFinite()) throw ParameterError("cluster input has non-finite values");
}

Clustering all_noise(Eigen::Index n) {
  Clustering c;
  c.labels.assign(static_cast<std::size_t>(n), kOutlier);
  c.all_outliers = true;
  return c;
}

// Number clusters by the smallest member index of each.
void canonical_numbering(Clustering& c) {
  std::map<int, int> remap;
  for (int& l : c.labels) {
    if (l == kOutlier) continue;
    auto [it, fresh] = remap.try_emplace(l, static_cast<int>(remap.size()));
    l = it->second;
  }
  c.n_clusters = static_cast<int>(remap.size());
  c.all_outliers = c.n_clusters == 0;
}

struct UnionFind {
  std::vector<int> parent, size;
  explicit UnionFind(int n) : parent(n), size(n, 1) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
};

struct CondensedEntry {
  int parent;
  int child;  // point index (< n) or cluster id (>= n)
  double lambda;
  int child_size;
};

}  // namespace

Clustering hdbscan(const Matrix& pts, int min_cluster_size, int min_samples) {
  check_points(pts, min_cluster_size);
  const int n = static_cast<int>(pts.rows());
  if (min_cluster_size > n || n < 2) return all_noise(n);
  if (min_samples <= 0) min_samples = min_cluster_size;
  min_samples = std::min(min_samples, n);

  // Core distance: distance to the min_samples-th nearest point, the point
  // itself counting as the first.
  const auto knn = detail::exact_knn(pts, min_samples, false);
  std::vector<double> core(n);
  for (int i = 0; i < n; ++i) core[i] = knn.dist[i].back();

  // Prim's MST over mutual reachability distances.
  struct Edge {
    int a, b;
    double w;
  };
  std::vector<Edge> mst;
  mst.reserve(n - 1);
  std::vector<char> in_tree(n, 0);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<int> from(n, -1);
  int cur = 0;
  in_tree[0] = 1;
  for (int step = 1; step < n; ++step) {
    for (int j = 0; j < n; ++j) {
      if (in_tree[j]) continue;
      const double mr = std::max({core[cur], core[j], detail::euclidean(pts, cur, j)});
      if (mr < best[j]) {
        best[j] = mr;
        from[j] = cur;
      }
    }
    int next = -1;
    for (int j = 0; j < n; ++j)
      if (!in_tree[j] && (next < 0 || best[j] < best[next])) next = j;
    in_tree[next] = 1;
    mst.push_back({from[next], next, best[next]});
    cur = next;
  }
  std::stable_sort(mst.begin(), mst.end(), [](const Edge& x, const Edge& y) { return x.w < y.w; });

  // Single-linkage dendrogram: node n + k is created by the k-th merge.
  std::vector<int> left(n - 1), right(n - 1), node_size(2 * n - 1, 1);
  std::vector<double> height(n - 1);
  {
    UnionFind uf(n);
    std::vector<int> top(n);
    std::iota(top.begin(), top.end(), 0);
    for (int k = 0; k < n - 1; ++k) {
      const int ra = uf.find(mst[k].a), rb = uf.find(mst[k].b);
      left[k] = top[ra];
      right[k] = top[rb];
      height[k] = mst[k].w;
      node_size[n + k] = node_size[left[k]] + node_size[right[k]];
      uf.parent[rb] = ra;
      top[ra] = n + k;
    }
  }

  // Zero distances (duplicate points) would give infinite lambdas.
  double min_pos = std::numeric_limits<double>::infinity();
  for (double h : height)
    if (h > 0) min_pos = std::min(min_pos, h);
  if (!std::isfinite(min_pos)) min_pos = 1.0;
  auto lambda_of = [&](double h) { return 1.0 / (h > 0 ? h : min_pos * 0.5); };

  // Condense: walk down from the root, keeping a cluster label only through
  // splits where both sides reach min_cluster_size.
  std::vector<CondensedEntry> tree;
  const int root = 2 * n - 2;
  int next_label = n + 1;  // n is the root cluster
  std::vector<std::pair<int, int>> stack{{root, n}};
  std::vector<double> birth{0.0};  // indexed by label - n
  auto add_points = [&](int node, int label, double lambda) {
    std::vector<int> st{node};
    while (!st.empty()) {
      const int x = st.back();
      st.pop_back();
      if (x < n)
        tree.push_back({label, x, lambda, 1});
      else {
        st.push_back(left[x - n]);
        st.push_back(right[x - n]);
      }
    }
  };
  while (!stack.empty()) {
    auto [node, label] = stack.back();
    stack.pop_back();
    if (node < n) {
      // Only reachable when the root itself is a leaf.
      tree.push_back({label, node, birth[label - n], 1});
      continue;
    }
    const int k = node - n;
    const double lambda = lambda_of(height[k]);
    const int l = left[k], r = right[k];
    const bool big_l = node_size[l] >= min_cluster_size;
    const bool big_r = node_size[r] >= min_cluster_size;
    if (big_l && big_r) {
      for (int c : {l, r}) {
        const int lab = next_label++;
        birth.push_back(lambda);
        tree.push_back({label, lab, lambda, node_size[c]});
        stack.push_back({c, lab});
      }
    } else {
      for (int c : {l, r}) {
        if (node_size[c] >= min_cluster_size)
          stack.push_back({c, label});
        else
          add_points(c, label, lambda);
      }
    }
  }

  const int n_labels = next_label - n;
  std::vector<double> stability(n_labels, 0.0);
  std::vector<int> parent_of(n_labels, -1);
  std::vector<std::vector<int>> children(n_labels);
  for (const auto& e : tree) {
    stability[e.parent - n] += e.child_size * (e.lambda - birth[e.parent - n]);
    if (e.child >= n) {
      parent_of[e.child - n] = e.parent - n;
      children[e.parent - n].push_back(e.child - n);
    }
  }

  // Excess of mass; the root is never a candidate.
  std::vector<char> selected(n_labels, 0);
  for (int c = n_labels - 1; c >= 1; --c) {
    double child_sum = 0;
    for (int ch : children[c]) child_sum += stability[ch];
    if (!children[c].empty() && child_sum > stability[c]) {
      stability[c] = child_sum;
    } else {
      selected[c] = 1;
      std::vector<int> st(children[c]);
      while (!st.empty()) {
        const int x = st.back();
        st.pop_back();
        selected[x] = 0;
        st.insert(st.end(), children[x].begin(), children[x].end());
      }
    }
  }

  Clustering out;
  out.labels.assign(n, kOutlier);
  for (const auto& e : tree) {
    if (e.child >= n) continue;
    for (int c = e.parent - n; c > 0; c = parent_of[c])
      if (selected[c]) {
        out.labels[e.child] = c;
        break;
      }
  }
  canonical_numbering(out);
  return out;
}

Clustering leader_cluster(const Matrix& pts, int min_cluster_size, double radius) {
  check_points(pts, min_cluster_size);
  const Eigen::Index n = pts.rows();
  if (min_cluster_size > n) return all_noise(n);

  Matrix dist(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    dist(i, i) = 0;
    for (Eigen::Index j = i + 1; j < n; ++j) dist(i, j) = dist(j, i) = detail::euclidean(pts, i, j);
  }
  if (radius <= 0) {
    // Median over points of the distance to the (min_cluster_size-1)-th neighbour.
    std::vector<double> kth(n), row(n);
    const auto k = static_cast<std::size_t>(std::min<Eigen::Index>(min_cluster_size - 1, n - 1));
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) row[j] = dist(i, j);
      std::nth_element(row.begin(), row.begin() + k, row.end());
      kth[i] = row[k];
    }
    std::nth_element(kth.begin(), kth.begin() + n / 2, kth.end());
    radius = kth[n / 2];
    if (radius <= 0) radius = std::numeric_limits<double>::min();
  }

  // Canonical visiting order: densest first, ties broken by coordinates, so
  // the result does not depend on row order.
  std::vector<int> density(n, 0);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (dist(i, j) <= radius) ++density[i];
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (density[a] != density[b]) return density[a] > density[b];
    for (Eigen::Index c = 0; c < pts.cols(); ++c)
      if (pts(a, c) != pts(b, c)) return pts(a, c) < pts(b, c);
    return false;
  });

  std::vector<Eigen::Index> leaders;
  std::vector<int> assign(n, -1);
  for (auto i : order) {
    int best = -1;
    for (std::size_t l = 0; l < leaders.size(); ++l) {
      const double d = dist(i, leaders[l]);
      if (d <= radius && (best < 0 || d < dist(i, leaders[best]))) best = static_cast<int>(l);
    }
    if (best < 0) {
      best = static_cast<int>(leaders.size());
      leaders.push_back(i);
    }
    assign[i] = best;
  }
  std::vector<int> sizes(leaders.size(), 0);
  for (int a : assign) ++sizes[a];

  // Leader order is canonical, so number surviving groups in that order.
  std::vector<int> label_of(leaders.size(), kOutlier);
  int next = 0;
  for (std::size_t l = 0; l < leaders.size(); ++l)
    if (sizes[l] >= min_cluster_size) label_of[l] = next++;
  Clustering out;
  out.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) out.labels[i] = label_of[assign[i]];
  out.n_clusters = next;
  out.all_outliers = next == 0;
  return out;
}

Clustering cluster(const Matrix& reduced, const ClusterParams& c, ClusterMethod method) {
  if (method == ClusterMethod::leader) return leader_cluster(reduced, c.min_cluster_size, c.leader_radius);
  return hdbscan(reduced, c.min_cluster_size, c.min_samples);
}

}  // namespace cbcomm::topicmodel
