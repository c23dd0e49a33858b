#pragma once

#include "sodkit/tensor.hpp"

namespace sodkit {

// Single-head scaled dot-product attention weights.
struct AttnParams {
  Tensor wq;  // [d, d]
  Tensor wk;  // [d, d]
  Tensor wv;  // [d, d]
};

// softmax(Q K^T / sqrt(d)) with Q = q_seq * Wq and K = kv_seq * Wk.
// Materializes the full [B, N, M] score matrix; intended for small inputs
// (tests, diagnostics).
Tensor attention_scores(const Tensor& q_seq, const Tensor& kv_seq, const AttnParams& p);

// softmax(Q K^T / sqrt(d)) * (kv_seq * Wv) -> [B, N, d]. Streams one score
// row at a time, so memory stays O(N) regardless of sequence length. Rows
// are computed by the same routine attention_scores uses.
Tensor attention_apply(const Tensor& q_seq, const Tensor& kv_seq, const AttnParams& p);

}  // namespace sodkit
