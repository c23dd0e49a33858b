#include "sodkit/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace sodkit {

DistanceMatrix pairwise_distances(const Tensor& features, const GridSpec& grid, double alpha) {
  if (features.rank() != 2) throw ShapeError("pairwise_distances expects features [N, d]");
  if (grid.rows < 1 || grid.cols < 1) throw ParamError("grid extents must be >= 1");
  if (alpha < 0.0 || alpha > 1.0) throw ParamError("alpha must lie in [0, 1]");
  const std::int64_t n = features.dim(0);
  if (n != grid.nodes()) throw ShapeError("feature row count must equal grid node count");
  const std::int64_t d = features.dim(1);

  std::vector<double> norms(static_cast<std::size_t>(n));
  bool zero_norm = false;
  for (std::int64_t i = 0; i < n; ++i) {
    const float* row = features.ptr() + i * d;
    double s = 0.0;
    for (std::int64_t c = 0; c < d; ++c) s += static_cast<double>(row[c]) * row[c];
    const double nr = std::sqrt(s);
    norms[static_cast<std::size_t>(i)] = nr;
    if (nr == 0.0) zero_norm = true;
  }

  const double row_div = static_cast<double>(std::max<std::int64_t>(grid.rows - 1, 1));
  const double col_div = static_cast<double>(std::max<std::int64_t>(grid.cols - 1, 1));

  DistanceMatrix out;
  out.values = Tensor({n, n});
  out.zero_norm_feature = zero_norm;
  float* dm = out.values.ptr();

  for (std::int64_t i = 0; i < n; ++i) {
    dm[i * n + i] = 0.0f;
    const double yi = static_cast<double>(i / grid.cols) / row_div;
    const double xi = static_cast<double>(i % grid.cols) / col_div;
    const float* fi = features.ptr() + i * d;
    for (std::int64_t j = i + 1; j < n; ++j) {
      const double yj = static_cast<double>(j / grid.cols) / row_div;
      const double xj = static_cast<double>(j % grid.cols) / col_div;
      const double spatial = std::sqrt((yi - yj) * (yi - yj) + (xi - xj) * (xi - xj));

      const float* fj = features.ptr() + j * d;
      double dot = 0.0;
      for (std::int64_t c = 0; c < d; ++c) {
        dot += static_cast<double>(fi[c]) * static_cast<double>(fj[c]);
      }
      const double denom = norms[static_cast<std::size_t>(i)] * norms[static_cast<std::size_t>(j)];
      double cosine = denom > 0.0 ? dot / denom : 0.0;
      cosine = std::clamp(cosine, -1.0, 1.0);
      const double feature = 1.0 - cosine;

      const float v = static_cast<float>(alpha * spatial + (1.0 - alpha) * feature);
      dm[i * n + j] = v;
      dm[j * n + i] = v;
    }
  }
  return out;
}

Tensor topk_adjacency(const DistanceMatrix& dist, std::int64_t k) {
  const Tensor& d = dist.values;
  if (d.rank() != 2 || d.dim(0) != d.dim(1)) throw ShapeError("distance matrix must be square");
  const std::int64_t n = d.dim(0);
  if (k < 1 || k > n - 1) throw ParamError("K must lie in [1, N-1]");

  Tensor adj({n, n});
  std::vector<std::int64_t> idx(static_cast<std::size_t>(n - 1));
  for (std::int64_t i = 0; i < n; ++i) {
    const float* row = d.ptr() + i * n;
    std::int64_t w = 0;
    for (std::int64_t j = 0; j < n; ++j) {
      if (j != i) idx[static_cast<std::size_t>(w++)] = j;
    }
    auto cmp = [row](std::int64_t a, std::int64_t b) {
      if (row[a] != row[b]) return row[a] < row[b];
      return a < b;
    };
    std::nth_element(idx.begin(), idx.begin() + (k - 1), idx.end(), cmp);
    for (std::int64_t s = 0; s < k; ++s) {
      adj.ptr()[i * n + idx[static_cast<std::size_t>(s)]] = 1.0f;
    }
  }
  return adj;
}

NormalizedGraph normalize_adjacency(const Tensor& adjacency, std::int64_t k, bool symmetrize) {
  if (adjacency.rank() != 2 || adjacency.dim(0) != adjacency.dim(1)) {
    throw ShapeError("adjacency must be square");
  }
  const std::int64_t n = adjacency.dim(0);
  const float* a = adjacency.ptr();
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < n; ++j) {
      const float v = a[i * n + j];
      if (v != 0.0f && v != 1.0f) throw ParamError("adjacency must be binary");
      if (i == j && v != 0.0f) throw ParamError("adjacency diagonal must be zero");
    }
  }

  NormalizedGraph g;
  g.adjacency = adjacency;
  g.neighbors = k;
  g.op = Tensor({n, n});

  // A + I, optionally symmetrized.
  std::vector<float> tilde(static_cast<std::size_t>(n * n));
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < n; ++j) {
      float v = a[i * n + j];
      if (symmetrize) v = std::max(v, a[j * n + i]);
      if (i == j) v = 1.0f;
      tilde[static_cast<std::size_t>(i * n + j)] = v;
    }
  }

  std::vector<double> inv_sqrt_deg(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    double deg = 0.0;
    for (std::int64_t j = 0; j < n; ++j) deg += tilde[static_cast<std::size_t>(i * n + j)];
    inv_sqrt_deg[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(deg);
  }
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < n; ++j) {
      g.op.ptr()[i * n + j] = static_cast<float>(tilde[static_cast<std::size_t>(i * n + j)] *
                                                 inv_sqrt_deg[static_cast<std::size_t>(i)] *
                                                 inv_sqrt_deg[static_cast<std::size_t>(j)]);
    }
  }
  return g;
}

NormalizedGraph build_graph(const Tensor& features, const GridSpec& grid, const GraphOptions& opt) {
  const DistanceMatrix dist = pairwise_distances(features, grid, opt.alpha);
  const Tensor adj = topk_adjacency(dist, opt.neighbors);
  return normalize_adjacency(adj, opt.neighbors, opt.symmetrize);
}

}  // namespace sodkit
