#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "sodkit/model_types.hpp"
#include "sodkit/tensor.hpp"

namespace sodkit {

// Scalar loss with its gradient w.r.t. the prediction.
struct LossValue {
  double value = 0.0;
  Tensor grad;
  bool degenerate = false;  // IoU with an all-zero union
};

// Mean binary cross-entropy. Predictions are clamped to [eps, 1-eps] with
// eps = 1e-7; grad[i] = (S_i - Y_i) / (S_i (1 - S_i) N) on the clamped value.
LossValue bce_loss(const Tensor& s, const Tensor& y);

// 1 - sum(S Y) / sum(S + Y - S Y). An all-zero union yields value 0, zero
// gradient, and the degenerate flag.
LossValue iou_loss(const Tensor& s, const Tensor& y);

// Per-output and combined loss values. Keys: s16, s8, s4, m4, m2, m1.
struct LossBreakdown {
  std::map<std::string, double> bce_per_output;
  std::map<std::string, double> iou_per_output;
  double sal = 0.0;
  double consistency = 0.0;
  double total = 0.0;
};

// Ground truth is area-average pooled (soft values kept) to each output's
// resolution; sal sums BCE + IoU over all six outputs.
LossBreakdown saliency_loss(const SaliencyOutputs& s, const MaskOutputs& m, const Tensor& y);

// One cross-scale pair: lambda * mean |up(coarse) - fine| with the coarse
// member upsampled bilinearly to the finer resolution. With detach_finer the
// fine member is treated as a constant and the gradient flows only to the
// coarse member through the upsampler; otherwise the roles flip.
struct ConsistencyPair {
  double value = 0.0;
  Tensor grad_coarse;
  Tensor grad_fine;
};
ConsistencyPair consistency_pair(const Tensor& coarse, const Tensor& fine, double lambda,
                                 bool detach_finer);

// Sum over the adjacent pairs (s16, s8) and (s8, s4).
struct ConsistencyResult {
  double value = 0.0;
  Tensor grad_s16;
  Tensor grad_s8;
  Tensor grad_s4;
};
ConsistencyResult consistency_loss(const SaliencyOutputs& s, double lambda,
                                   bool detach_finer = true);

LossBreakdown total_loss(const SaliencyOutputs& s, const MaskOutputs& m, const Tensor& y,
                         double lambda, bool detach_finer = true);

enum class LossKind { Bce, Iou, Consistency };

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::int64_t worst_index = -1;
  bool pass = false;
};

// Central differences against the analytic gradient, per pixel. For Bce and
// Iou the loss is evaluated on (S, Y) directly; for Consistency it is
// mean |up(S -> Y's extents) - Y| with Y held constant. The relative error
// is |a - n| / max(|a|, |n|, 1e-8).
GradCheckReport finite_diff_check(LossKind kind, const Tensor& s, const Tensor& y, double h,
                                  double threshold = 1e-3);

}  // namespace sodkit
