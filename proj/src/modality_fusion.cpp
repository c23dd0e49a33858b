#include "sodkit/modality_fusion.hpp"

#include <cmath>

#include "sodkit/interaction.hpp"

namespace sodkit {

Tensor encode_modality(const Tensor& f, const ConvParams& proj, const AttnParams& attn) {
  if (f.rank() != 4) throw ShapeError("encode_modality expects [B, C, H, W]");
  const Tensor embedded = conv(f, proj);
  const Tensor seq = flatten_spatial(embedded);
  const Tensor attended = attention_apply(seq, seq, attn);
  return unflatten_spatial(attended, embedded.dim(2), embedded.dim(3));
}

std::array<double, 3> modality_weights(const std::array<float, 3>& theta) {
  for (float t : theta) {
    if (!std::isfinite(t)) throw NumericError("modality logits must be finite");
  }
  const double m = std::max({theta[0], theta[1], theta[2]});
  std::array<double, 3> w{};
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    w[static_cast<std::size_t>(i)] = std::exp(static_cast<double>(theta[static_cast<std::size_t>(i)]) - m);
    sum += w[static_cast<std::size_t>(i)];
  }
  for (double& v : w) v /= sum;
  return w;
}

Tensor fuse_modalities(const std::array<Tensor, 3>& encoded, const std::array<double, 3>& weights) {
  if (!encoded[0].same_shape(encoded[1]) || !encoded[0].same_shape(encoded[2])) {
    throw ShapeError("fuse_modalities inputs must share one shape");
  }
  Tensor out;
  out.dims = encoded[0].dims;
  out.data.resize(encoded[0].data.size());
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = static_cast<float>(weights[0] * encoded[0].data[i] +
                                     weights[1] * encoded[1].data[i] +
                                     weights[2] * encoded[2].data[i]);
  }
  return out;
}

Tensor modality_fusion_forward(const std::array<Tensor, 3>& modality_features, const ModalityFusionParams& params) {
  std::array<Tensor, 3> encoded;
  for (std::size_t m = 0; m < 3; ++m) {
    encoded[m] = encode_modality(modality_features[m], params.proj[m], params.attn[m]);
  }
  return fuse_modalities(encoded, modality_weights(params.theta));
}

}  // namespace sodkit
