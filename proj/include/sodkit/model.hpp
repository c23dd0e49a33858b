#pragma once

#include <array>
#include <cstdint>
#include <utility>

#include "sodkit/interaction.hpp"
#include "sodkit/modality_fusion.hpp"
#include "sodkit/model_types.hpp"
#include "sodkit/tensor.hpp"

namespace sodkit {

struct ModelConfig {
  std::int64_t input_h = 384;
  std::int64_t input_w = 384;
  std::array<std::int64_t, 4> backbone_channels{16, 32, 64, 128};
  std::int64_t embed_dim = 64;  // d
  double alpha_graph = 0.5;
  std::int64_t k_neighbors = 8;
  std::array<std::int64_t, 4> graph_pool{4, 2, 1, 1};
  double lambda_c = 0.1;
  std::uint64_t seed = 1;
  bool graph_symmetrize = false;
  bool consistency_detach_finer = true;

  void validate() const;
};

// Five stride-2 3x3 stages: two form the stride-4 stem, three more reach
// strides 8, 16 and 32.
struct BackboneParams {
  std::array<ConvParams, 5> stages;
};

struct DecoderParams {
  ConvParams merge_8;      // 3x3 d -> d after upsampling the stride-16 feature
  ConvParams merge_4;      // 3x3 d -> d after upsampling the stride-8 feature
  ConvParams head_16;      // 1x1 d -> 1
  ConvParams head_8;       // 1x1 d -> 1
  ConvParams head_4;       // 1x1 d -> 1
  ConvParams mask_up_2;    // 3x3 d -> d/2 after upsampling to stride 2
  ConvParams mask_up_1;    // 3x3 d/2 -> d/4 after upsampling to stride 1
  ConvParams mask_head_4;  // 1x1 d -> 1
  ConvParams mask_head_2;  // 1x1 d/2 -> 1
  ConvParams mask_head_1;  // 1x1 d/4 -> 1
};

struct ModelParams {
  BackboneParams backbone;
  std::array<InteractionLevelParams, 4> interaction;
  std::array<ModalityFusionParams, 4> fusion;  // one per level
  DecoderParams decoder;

  // All weights drawn from one SplitMix64 stream seeded by the config, in a
  // fixed construction order, so a seed fully determines the model.
  static ModelParams init(const ModelConfig& cfg);
};

// Sobel gradient magnitude of the luma channel, normalized per image by its
// maximum (an all-flat image maps to all zeros). Borders are clamped.
Tensor derive_edge(const Tensor& rgb);

LevelFeatures backbone_forward(const Tensor& x, const BackboneParams& params);

std::pair<SaliencyOutputs, MaskOutputs> model_forward(const ModalityInputs& inputs,
                                                      const ModelParams& params,
                                                      const ModelConfig& cfg);

}  // namespace sodkit
