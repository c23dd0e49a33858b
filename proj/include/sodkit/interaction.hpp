#pragma once

#include <array>
#include <optional>
#include <vector>

#include "sodkit/attention.hpp"
#include "sodkit/graph.hpp"
#include "sodkit/tensor.hpp"

namespace sodkit {

// Squeeze-excitation weights: pool -> linear C -> C/r -> relu -> linear
// C/r -> C -> sigmoid.
struct SeParams {
  Tensor w1;  // [C/r, C]
  Tensor b1;  // [C/r]
  Tensor w2;  // [C, C/r]
  Tensor b2;  // [C]
};

// Two-layer MLP d -> d/4 -> 1 with relu in between.
struct MlpParams {
  Tensor w1;  // [h, d]
  Tensor b1;  // [h]
  Tensor w2;  // [1, h]
  Tensor b2;  // [1]
};

// Fusion with a nearby coarser level: project to d, upsample, concatenate,
// then two 3x3 convolutions with a relu after the first.
struct FusePathParams {
  ConvParams proj;   // 1x1 C_hi -> d
  ConvParams conv1;  // 3x3 2d -> d
  ConvParams conv2;  // 3x3 d -> d
};

// Fusion with the far level through cross-attention plus a residual.
struct CrossPathParams {
  ConvParams proj;  // 1x1 C_far -> d
  AttnParams attn;
  Tensor out_map;  // [d, d]
};

// Everything one anchor level needs. `adjacent` holds the k=1,2 paths that
// exist for this level, `cross` the k=3 path when the level has one.
struct InteractionLevelParams {
  SeParams se;
  ConvParams proj;  // 1x1 C -> d
  std::array<Tensor, 3> gcn;  // [d, d] each
  MlpParams unc_mlp;
  std::vector<FusePathParams> adjacent;
  std::optional<CrossPathParams> cross;
  ConvParams bottleneck1;  // 3x3 (paths * d) -> d
  ConvParams bottleneck2;  // 1x1 d -> C
};

struct InteractionOptions {
  std::int64_t embed_dim = 64;
  GraphOptions graph;
  std::array<std::int64_t, 4> pool{4, 2, 1, 1};  // graph-pooling factor per level
};

// Backbone pyramid at strides 4, 8, 16, 32.
struct LevelFeatures {
  std::array<Tensor, 4> levels;
};

Tensor channel_attention(const Tensor& f, const SeParams& se);

struct EmbeddedFeatures {
  Tensor fmap;  // [B, d, H, W]
  Tensor seq;   // [B, N, d], node n = y * W + x
};
EmbeddedFeatures embed_and_flatten(const Tensor& f, const ConvParams& proj);

Tensor flatten_spatial(const Tensor& fmap);
Tensor unflatten_spatial(const Tensor& seq, std::int64_t h, std::int64_t w);

// X^{t+1} = X^t + relu(op * X^t * W_t) for t = 0, 1, 2. The same graph is
// applied to every batch element.
Tensor propagate_uncertainty(const Tensor& x, const NormalizedGraph& g,
                             const std::array<Tensor, 3>& gcn);

// Per-node sigmoid(MLP(x)) reshaped to [B, 1, H, W].
Tensor uncertainty_map(const Tensor& x3, const MlpParams& mlp, std::int64_t h, std::int64_t w);

// fmap * (1 + u), broadcasting u over channels. The multiplier lies in (1, 2).
Tensor apply_uncertainty_gate(const Tensor& fmap, const Tensor& umap);

Tensor uncertainty_gate(const Tensor& fmap, const Tensor& x3, const MlpParams& mlp);

Tensor fuse_adjacent(const Tensor& f_prime, const Tensor& f_hi, const FusePathParams& path);

Tensor cross_attention_fuse(const Tensor& f_prime, const Tensor& f_far,
                            const CrossPathParams& path);

// Full interaction for all four levels: channel attention, embedding, graph
// propagation and gating, the per-k fusion paths, and the bottleneck back to
// the level's channel count.
std::array<Tensor, 4> interaction_forward(const LevelFeatures& levels,
                                   const std::array<InteractionLevelParams, 4>& params,
                                   const InteractionOptions& opt);

}  // namespace sodkit
