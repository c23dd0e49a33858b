#pragma once

#include <string>
#include <vector>

#include "sodkit/metrics.hpp"

namespace sodkit {

struct EvalOptions {
  std::string pred_dir;
  std::string gt_dir;
  bool resize_pred = false;  // bilinearly resize predictions to the GT extents
  MetricConfig metrics;
  int threads = 0;  // 0 = SODKIT_THREADS or hardware default
};

struct EvalRow {
  std::string name;
  ImageMetrics metrics;
};

struct EvalResult {
  std::vector<EvalRow> rows;  // sorted by name
  MetricReport aggregate;
  std::vector<std::string> warnings;
};

// Pairs prediction and ground-truth files by filename stem, computes
// per-image metrics (optionally in parallel), and folds the aggregate in
// name-sorted order so results are independent of scheduling.
EvalResult evaluate_directories(const EvalOptions& opt);

struct PrResult {
  PrCurve curve;
  std::int64_t n_images = 0;
  std::vector<std::string> warnings;
};

PrResult pr_directories(const EvalOptions& opt);

// Resolves the worker count: explicit request, else SODKIT_THREADS, else the
// hardware concurrency, always at least 1.
int worker_count(int requested);

// Grayscale [H, W] view of an image tensor ([1|3, H, W]); RGB collapses to
// luma.
Tensor to_gray(const Tensor& img);

// Binarized ground truth: gray value >= 0.5 counts as foreground.
Tensor binarize_gt(const Tensor& gray);

}  // namespace sodkit
