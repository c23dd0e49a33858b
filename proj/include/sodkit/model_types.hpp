#pragma once

#include <optional>

#include "sodkit/tensor.hpp"

namespace sodkit {

// Network inputs in [0, 1]. Missing depth is treated as a constant 0.5 map;
// a missing edge map is derived from the RGB image.
struct ModalityInputs {
  Tensor rgb;                   // [B, 3, H, W]
  std::optional<Tensor> depth;  // [B, 1, H, W]
  std::optional<Tensor> edge;   // [B, 1, H, W]
};

// Sigmoid-activated saliency maps at 1/16, 1/8 and 1/4 of the input size.
struct SaliencyOutputs {
  Tensor s16;
  Tensor s8;
  Tensor s4;
};

// Sigmoid-activated masks at 1/4, 1/2 and full input size.
struct MaskOutputs {
  Tensor m4;
  Tensor m2;
  Tensor m1;
};

}  // namespace sodkit
