#pragma once

#include <cstdint>

#include "sodkit/tensor.hpp"

namespace sodkit {

// Regular H x W grid of nodes in row-major order: node n sits at
// (n / cols, n % cols).
struct GridSpec {
  std::int64_t rows = 0;
  std::int64_t cols = 0;

  std::int64_t nodes() const { return rows * cols; }
};

// Combined spatial-semantic distances between all node pairs.
struct DistanceMatrix {
  Tensor values;                   // [N, N]
  bool zero_norm_feature = false;  // a zero feature vector was treated as cosine similarity 0
};

// Top-K adjacency with self-loops folded in through the normalized operator
// D^{-1/2} (A + I) D^{-1/2}, where D holds the row sums of A + I.
struct NormalizedGraph {
  Tensor adjacency;  // [N, N], binary, zero diagonal
  std::int64_t neighbors = 0;
  Tensor op;  // [N, N]
};

struct GraphOptions {
  double alpha = 0.5;          // weight of the spatial term
  std::int64_t neighbors = 8;  // K
  bool symmetrize = false;     // use max(A+I, (A+I)^T) before normalizing
};

// D(i,j) = alpha * |P_i - P_j|_2 + (1 - alpha) * (1 - cos(x_i, x_j)) with grid
// positions normalized to [0,1] per axis (row / max(rows-1, 1), likewise for
// columns). A zero-norm feature vector contributes cosine similarity 0 and
// sets the warning flag.
DistanceMatrix pairwise_distances(const Tensor& features, const GridSpec& grid, double alpha);

// Row i gets ones at the K smallest off-diagonal distances of row i; ties are
// broken toward the smaller column index. 1 <= K <= N-1.
Tensor topk_adjacency(const DistanceMatrix& dist, std::int64_t k);

// adjacency must be binary with a zero diagonal.
NormalizedGraph normalize_adjacency(const Tensor& adjacency, std::int64_t k, bool symmetrize = false);

NormalizedGraph build_graph(const Tensor& features, const GridSpec& grid, const GraphOptions& opt);

}  // namespace sodkit
