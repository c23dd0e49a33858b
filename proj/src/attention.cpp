#include "sodkit/attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace sodkit {

namespace {

void check_attention_inputs(const Tensor& q_seq, const Tensor& kv_seq, const AttnParams& p) {
  if (q_seq.rank() != 3 || kv_seq.rank() != 3) {
    throw ShapeError("attention expects [B, N, d] sequences");
  }
  if (q_seq.dim(0) != kv_seq.dim(0)) throw ShapeError("attention batch extents disagree");
  const std::int64_t d = q_seq.dim(2);
  if (kv_seq.dim(2) != d) throw ShapeError("attention embedding widths disagree");
  for (const Tensor* w : {&p.wq, &p.wk, &p.wv}) {
    if (w->rank() != 2 || w->dim(0) != d || w->dim(1) != d) {
      throw ShapeError("attention projections must be [d, d]");
    }
  }
}

// scores[j] = sum_k q_row[k] * kt[k, j], scaled, then softmaxed in double.
void score_row(const float* q_row, const float* kt, std::int64_t m, std::int64_t d, double scale,
               std::vector<double>& row) {
  std::fill(row.begin(), row.end(), 0.0);
  for (std::int64_t kk = 0; kk < d; ++kk) {
    const double qv = q_row[kk];
    const float* krow = kt + kk * m;
    for (std::int64_t j = 0; j < m; ++j) row[static_cast<std::size_t>(j)] += qv * krow[j];
  }
  double maxv = -std::numeric_limits<double>::infinity();
  for (std::int64_t j = 0; j < m; ++j) {
    row[static_cast<std::size_t>(j)] *= scale;
    maxv = std::max(maxv, row[static_cast<std::size_t>(j)]);
  }
  double sum = 0.0;
  for (std::int64_t j = 0; j < m; ++j) {
    const double e = std::exp(row[static_cast<std::size_t>(j)] - maxv);
    row[static_cast<std::size_t>(j)] = e;
    sum += e;
  }
  const double inv = 1.0 / sum;
  for (std::int64_t j = 0; j < m; ++j) row[static_cast<std::size_t>(j)] *= inv;
}

Tensor transpose2d(const float* src, std::int64_t rows, std::int64_t cols) {
  Tensor t({cols, rows});
  for (std::int64_t r = 0; r < rows; ++r) {
    for (std::int64_t c = 0; c < cols; ++c) t.ptr()[c * rows + r] = src[r * cols + c];
  }
  return t;
}

Tensor project(const Tensor& seq, const Tensor& w, std::int64_t b) {
  const std::int64_t n = seq.dim(1);
  const std::int64_t d = seq.dim(2);
  Tensor slice;
  slice.dims = {n, d};
  slice.data.assign(seq.ptr() + b * n * d, seq.ptr() + (b + 1) * n * d);
  return matmul2d(slice, w);
}

}  // namespace

Tensor attention_scores(const Tensor& q_seq, const Tensor& kv_seq, const AttnParams& p) {
  check_attention_inputs(q_seq, kv_seq, p);
  const std::int64_t batches = q_seq.dim(0);
  const std::int64_t n = q_seq.dim(1);
  const std::int64_t m = kv_seq.dim(1);
  const std::int64_t d = q_seq.dim(2);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));

  Tensor out({batches, n, m});
  std::vector<double> row(static_cast<std::size_t>(m));
  for (std::int64_t b = 0; b < batches; ++b) {
    const Tensor q = project(q_seq, p.wq, b);
    const Tensor k = project(kv_seq, p.wk, b);
    const Tensor kt = transpose2d(k.ptr(), m, d);
    for (std::int64_t i = 0; i < n; ++i) {
      score_row(q.ptr() + i * d, kt.ptr(), m, d, scale, row);
      float* orow = out.ptr() + (b * n + i) * m;
      for (std::int64_t j = 0; j < m; ++j) orow[j] = static_cast<float>(row[static_cast<std::size_t>(j)]);
    }
  }
  return out;
}

Tensor attention_apply(const Tensor& q_seq, const Tensor& kv_seq, const AttnParams& p) {
  check_attention_inputs(q_seq, kv_seq, p);
  const std::int64_t batches = q_seq.dim(0);
  const std::int64_t n = q_seq.dim(1);
  const std::int64_t m = kv_seq.dim(1);
  const std::int64_t d = q_seq.dim(2);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));

  Tensor out({batches, n, d});
  std::vector<double> row(static_cast<std::size_t>(m));
  std::vector<double> acc(static_cast<std::size_t>(d));
  for (std::int64_t b = 0; b < batches; ++b) {
    const Tensor q = project(q_seq, p.wq, b);
    const Tensor k = project(kv_seq, p.wk, b);
    const Tensor v = project(kv_seq, p.wv, b);
    const Tensor kt = transpose2d(k.ptr(), m, d);
    for (std::int64_t i = 0; i < n; ++i) {
      score_row(q.ptr() + i * d, kt.ptr(), m, d, scale, row);
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::int64_t j = 0; j < m; ++j) {
        const double wv = row[static_cast<std::size_t>(j)];
        const float* vrow = v.ptr() + j * d;
        for (std::int64_t c = 0; c < d; ++c) acc[static_cast<std::size_t>(c)] += wv * vrow[c];
      }
      float* orow = out.ptr() + (b * n + i) * d;
      for (std::int64_t c = 0; c < d; ++c) orow[c] = static_cast<float>(acc[static_cast<std::size_t>(c)]);
    }
  }
  return out;
}

}  // namespace sodkit
