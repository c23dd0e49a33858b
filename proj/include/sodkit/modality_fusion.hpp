#pragma once

#include <array>

#include "sodkit/attention.hpp"
#include "sodkit/tensor.hpp"

namespace sodkit {

// Per-modality projection and attention weights plus the shared gating
// logits. Modality order: 0 = RGB, 1 = depth, 2 = edge.
struct ModalityFusionParams {
  std::array<ConvParams, 3> proj;  // 1x1 C -> d
  std::array<AttnParams, 3> attn;
  std::array<float, 3> theta{0.0f, 0.0f, 0.0f};
};

// 1x1 projection to the shared embedding width, then non-residual
// single-head self-attention over the flattened positions.
Tensor encode_modality(const Tensor& f, const ConvParams& proj, const AttnParams& attn);

// softmax over the gating logits.
std::array<double, 3> modality_weights(const std::array<float, 3>& theta);

// Convex combination of the three encoded streams.
Tensor fuse_modalities(const std::array<Tensor, 3>& encoded, const std::array<double, 3>& weights);

Tensor modality_fusion_forward(const std::array<Tensor, 3>& modality_features, const ModalityFusionParams& params);

}  // namespace sodkit
