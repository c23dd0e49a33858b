#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sodkit/tensor.hpp"

namespace sodkit {

struct MetricConfig {
  double beta2 = 0.3;          // precision/recall balance of the weighted F-measure
  double alpha_s = 0.5;        // object/region balance of the S-measure
  double iou_threshold = 0.5;  // binarization threshold for mSIOU

  void validate() const;
};

// Per-image metric values.
struct ImageMetrics {
  double mae = 0.0;
  double msiou = 0.0;
  double s_measure = 0.0;
  double weighted_f = 0.0;
};

// Dataset means.
struct MetricReport {
  double mae = 0.0;
  double msiou = 0.0;
  double s_measure = 0.0;
  double weighted_f = 0.0;
  std::int64_t n_images = 0;
};

// 256 thresholds t_k = k / 255 (k = 0..255), binarization rule P >= t.
struct PrCurve {
  static constexpr int kThresholds = 256;
  std::array<double, kThresholds> precision{};
  std::array<double, kThresholds> recall{};
};

// Predictions P are [H, W] in [0, 1]; ground truth G is binary [H, W].

double mae(const Tensor& p, const Tensor& g);

// IoU of the thresholded prediction against the ground truth for one image;
// both-empty counts as 1.
double msiou(const Tensor& p, const Tensor& g, double threshold);

// Structure measure: alpha * S_object + (1 - alpha) * S_region with the
// degenerate rules S = 1 - mean(P) for an all-background ground truth and
// S = mean(P) for an all-foreground one.
double s_measure(const Tensor& p, const Tensor& g, double alpha_s);

struct WeightedFResult {
  double value = 0.0;
  bool empty_gt = false;  // ground truth had no foreground; value forced to 0
};

// Weighted F-measure with boundary-aware error weighting: the error field is
// propagated from the nearest foreground pixel into the background, smoothed
// by a 7x7 Gaussian (sigma 5), and distance-decayed over the background.
WeightedFResult weighted_f(const Tensor& p, const Tensor& g, double beta2);

PrCurve pr_curve(const Tensor& p, const Tensor& g);

ImageMetrics compute_image_metrics(const Tensor& p, const Tensor& g, const MetricConfig& cfg);

// Arithmetic mean per metric, folded in input order.
MetricReport aggregate(const std::vector<ImageMetrics>& images);

// Pointwise mean of per-image curves.
PrCurve mean_curve(const std::vector<PrCurve>& curves);

}  // namespace sodkit
