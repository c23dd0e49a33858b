#include <doctest.h>

#include <cmath>

#include "sodkit/graph.hpp"

using namespace sodkit;

namespace {

Tensor random_features(Prng& rng, std::int64_t n, std::int64_t d) {
  Tensor t({n, d});
  for (auto& v : t.data) v = static_cast<float>(rng.next_unit() * 4.0 - 2.0);
  return t;
}

// Double-loop re-derivation of the combined distance, kept separate from the
// library implementation.
double oracle_distance(const Tensor& f, const GridSpec& grid, double alpha, std::int64_t i,
                       std::int64_t j) {
  const double rd = static_cast<double>(std::max<std::int64_t>(grid.rows - 1, 1));
  const double cd = static_cast<double>(std::max<std::int64_t>(grid.cols - 1, 1));
  const double yi = static_cast<double>(i / grid.cols) / rd;
  const double xi = static_cast<double>(i % grid.cols) / cd;
  const double yj = static_cast<double>(j / grid.cols) / rd;
  const double xj = static_cast<double>(j % grid.cols) / cd;
  const double spatial = std::hypot(yi - yj, xi - xj);

  double dot = 0.0, ni = 0.0, nj = 0.0;
  for (std::int64_t c = 0; c < f.dim(1); ++c) {
    dot += static_cast<double>(f.at(i, c)) * f.at(j, c);
    ni += static_cast<double>(f.at(i, c)) * f.at(i, c);
    nj += static_cast<double>(f.at(j, c)) * f.at(j, c);
  }
  double cosine = 0.0;
  if (ni > 0.0 && nj > 0.0) cosine = dot / (std::sqrt(ni) * std::sqrt(nj));
  if (cosine > 1.0) cosine = 1.0;
  if (cosine < -1.0) cosine = -1.0;
  return alpha * spatial + (1.0 - alpha) * (1.0 - cosine);
}

}  // namespace

TEST_SUITE_BEGIN("graph");

TEST_CASE("2x2 grid with identical unit features") {
  // All cosine distances vanish, leaving alpha-scaled spatial distances.
  Tensor f({4, 3});
  for (std::int64_t i = 0; i < 4; ++i) f.at(i, 0) = 1.0f;
  const DistanceMatrix dm = pairwise_distances(f, {2, 2}, 0.5);
  CHECK_FALSE(dm.zero_norm_feature);
  CHECK(dm.values.at(0, 1) == doctest::Approx(0.5).epsilon(1e-6));       // adjacent
  CHECK(dm.values.at(0, 2) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(dm.values.at(0, 3) == doctest::Approx(0.70710678).epsilon(1e-6));  // diagonal
  for (std::int64_t i = 0; i < 4; ++i) CHECK(dm.values.at(i, i) == 0.0f);
}

TEST_CASE("distances match the double-loop oracle and are symmetric") {
  Prng rng(31);
  const GridSpec grid{4, 4};
  const Tensor f = random_features(rng, 16, 6);
  const DistanceMatrix dm = pairwise_distances(f, grid, 0.37);
  for (std::int64_t i = 0; i < 16; ++i) {
    for (std::int64_t j = 0; j < 16; ++j) {
      CHECK(std::abs(dm.values.at(i, j) - oracle_distance(f, grid, 0.37, i, j)) < 1e-6);
      CHECK(std::abs(dm.values.at(i, j) - dm.values.at(j, i)) < 1e-6);
    }
  }
}

TEST_CASE("alpha endpoints recover the pure terms") {
  Prng rng(32);
  const GridSpec grid{3, 3};
  const Tensor f = random_features(rng, 9, 4);
  const DistanceMatrix spatial_only = pairwise_distances(f, grid, 1.0);
  const DistanceMatrix feature_only = pairwise_distances(f, grid, 0.0);
  for (std::int64_t i = 0; i < 9; ++i) {
    for (std::int64_t j = 0; j < 9; ++j) {
      CHECK(std::abs(spatial_only.values.at(i, j) - oracle_distance(f, grid, 1.0, i, j)) < 1e-6);
      CHECK(std::abs(feature_only.values.at(i, j) - oracle_distance(f, grid, 0.0, i, j)) < 1e-6);
    }
  }
  CHECK_THROWS_AS(pairwise_distances(f, grid, 1.5), ParamError);
}

TEST_CASE("entries stay within the alpha-weighted bound") {
  Prng rng(33);
  const double alpha = 0.6;
  const Tensor f = random_features(rng, 12, 5);
  const DistanceMatrix dm = pairwise_distances(f, {3, 4}, alpha);
  const double bound = alpha * std::sqrt(2.0) + (1.0 - alpha) * 2.0 + 1e-6;
  for (float v : dm.values.data) {
    CHECK(v >= 0.0f);
    CHECK(v <= bound);
  }
}

TEST_CASE("zero-norm feature rows raise the warning flag") {
  Tensor f({4, 2});
  f.at(1, 0) = 1.0f;
  f.at(2, 1) = 1.0f;
  f.at(3, 0) = 1.0f;  // row 0 stays zero
  const DistanceMatrix dm = pairwise_distances(f, {2, 2}, 0.0);
  CHECK(dm.zero_norm_feature);
  // cosine treated as 0 => feature distance 1 against every other node
  CHECK(dm.values.at(0, 1) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(dm.values.at(0, 0) == 0.0f);
}

TEST_CASE("top-k: complete graph when K = N-1") {
  DistanceMatrix dm;
  dm.values = Tensor({4, 4});
  Prng rng(34);
  for (std::int64_t i = 0; i < 4; ++i) {
    for (std::int64_t j = 0; j < 4; ++j) {
      dm.values.at(i, j) = i == j ? 0.0f : static_cast<float>(rng.next_unit());
    }
  }
  const Tensor adj = topk_adjacency(dm, 3);
  for (std::int64_t i = 0; i < 4; ++i) {
    for (std::int64_t j = 0; j < 4; ++j) {
      CHECK(adj.at(i, j) == (i == j ? 0.0f : 1.0f));
    }
  }
}

TEST_CASE("top-k tie break prefers the smaller column") {
  DistanceMatrix dm;
  dm.values = Tensor::from({4, 4}, {
      0.0f, 0.1f, 0.1f, 0.9f,
      0.1f, 0.0f, 0.5f, 0.6f,
      0.1f, 0.5f, 0.0f, 0.7f,
      0.9f, 0.6f, 0.7f, 0.0f,
  });
  const Tensor adj = topk_adjacency(dm, 1);
  CHECK(adj.at(0, 1) == 1.0f);  // ties with column 2, smaller index wins
  CHECK(adj.at(0, 2) == 0.0f);
  CHECK_THROWS_AS(topk_adjacency(dm, 0), ParamError);
  CHECK_THROWS_AS(topk_adjacency(dm, 4), ParamError);
}

TEST_CASE("top-k equals the full-sort oracle") {
  Prng rng(35);
  for (int inst = 0; inst < 20; ++inst) {
    const std::int64_t n = 64;
    DistanceMatrix dm;
    dm.values = Tensor({n, n});
    for (std::int64_t i = 0; i < n; ++i) {
      for (std::int64_t j = 0; j < n; ++j) {
        dm.values.at(i, j) = i == j ? 0.0f : static_cast<float>(rng.next() % 8) / 8.0f;
      }
    }
    for (const std::int64_t k : {std::int64_t{1}, std::int64_t{8}, std::int64_t{63}}) {
      const Tensor adj = topk_adjacency(dm, k);
      for (std::int64_t i = 0; i < n; ++i) {
        std::vector<std::int64_t> cols;
        for (std::int64_t j = 0; j < n; ++j) {
          if (j != i) cols.push_back(j);
        }
        const float* row = dm.values.ptr() + i * n;
        std::sort(cols.begin(), cols.end(), [row](std::int64_t a, std::int64_t b) {
          return row[a] != row[b] ? row[a] < row[b] : a < b;
        });
        std::int64_t ones = 0;
        for (std::int64_t j = 0; j < n; ++j) ones += adj.at(i, j) == 1.0f ? 1 : 0;
        REQUIRE(ones == k);
        for (std::int64_t s = 0; s < k; ++s) {
          REQUIRE(adj.at(i, cols[static_cast<std::size_t>(s)]) == 1.0f);
        }
      }
    }
  }
}

TEST_CASE("normalization of the 2-node complete graph") {
  Tensor adj({2, 2});
  adj.at(0, 1) = 1.0f;
  adj.at(1, 0) = 1.0f;
  const NormalizedGraph g = normalize_adjacency(adj, 1);
  for (float v : g.op.data) CHECK(v == doctest::Approx(0.5).epsilon(1e-7));
}

TEST_CASE("normalization of an empty adjacency is the identity") {
  const Tensor adj({3, 3});
  const NormalizedGraph g = normalize_adjacency(adj, 0);
  for (std::int64_t i = 0; i < 3; ++i) {
    for (std::int64_t j = 0; j < 3; ++j) {
      CHECK(g.op.at(i, j) == (i == j ? 1.0f : 0.0f));
    }
  }
}

TEST_CASE("normalization matches the dense formula oracle") {
  Prng rng(36);
  const std::int64_t n = 16;
  Tensor adj({n, n});
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < n; ++j) {
      if (i != j && rng.next() % 3 == 0) adj.at(i, j) = 1.0f;
    }
  }
  const NormalizedGraph g = normalize_adjacency(adj, 0);
  std::vector<double> deg(static_cast<std::size_t>(n), 0.0);
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < n; ++j) {
      deg[static_cast<std::size_t>(i)] += (i == j ? 1.0 : adj.at(i, j));
    }
  }
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < n; ++j) {
      const double tilde = i == j ? 1.0 : adj.at(i, j);
      const double expect =
          tilde / std::sqrt(deg[static_cast<std::size_t>(i)] * deg[static_cast<std::size_t>(j)]);
      CHECK(std::abs(g.op.at(i, j) - expect) < 1e-6);
    }
  }
}

TEST_CASE("normalization validates its input") {
  Tensor adj({2, 2});
  adj.at(0, 1) = 0.5f;
  CHECK_THROWS_AS(normalize_adjacency(adj, 1), ParamError);
  Tensor diag({2, 2});
  diag.at(0, 0) = 1.0f;
  CHECK_THROWS_AS(normalize_adjacency(diag, 1), ParamError);
}

TEST_CASE("asymmetric adjacency is kept unless symmetrize is requested") {
  // Node 2 sits far from everyone; its nearest neighbor is node 0, but node 0
  // prefers node 1, which makes A asymmetric under K = 1.
  Tensor f({3, 1});
  f.at(0, 0) = 1.0f;
  f.at(1, 0) = 1.0f;
  f.at(2, 0) = 1.0f;
  DistanceMatrix dm;
  dm.values = Tensor::from({3, 3}, {
      0.0f, 0.1f, 0.8f,
      0.1f, 0.0f, 0.9f,
      0.8f, 0.9f, 0.0f,
  });
  const Tensor adj = topk_adjacency(dm, 1);
  CHECK(adj.at(2, 0) == 1.0f);
  CHECK(adj.at(0, 2) == 0.0f);  // asymmetric

  const NormalizedGraph plain = normalize_adjacency(adj, 1, false);
  CHECK(plain.op.at(0, 2) == 0.0f);
  CHECK(plain.op.at(2, 0) > 0.0f);

  const NormalizedGraph sym = normalize_adjacency(adj, 1, true);
  CHECK(sym.op.at(0, 2) > 0.0f);
  CHECK(sym.op.at(2, 0) > 0.0f);
}

TEST_CASE("build_graph rows have exactly K ones off the diagonal") {
  Prng rng(37);
  const GridSpec grid{4, 5};
  const Tensor f = random_features(rng, 20, 8);
  const NormalizedGraph g = build_graph(f, grid, {0.5, 6, false});
  for (std::int64_t i = 0; i < 20; ++i) {
    std::int64_t ones = 0;
    for (std::int64_t j = 0; j < 20; ++j) {
      if (g.adjacency.at(i, j) == 1.0f) {
        ++ones;
        CHECK(i != j);
        CHECK(g.op.at(i, j) > 0.0f);
      }
    }
    CHECK(ones == 6);
    CHECK(g.op.at(i, i) > 0.0f);  // self-loop through A + I
  }
}

TEST_SUITE_END();
