#include "sodkit/losses.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace sodkit {

namespace {

constexpr double kBceEps = 1e-7;

void check_same(const Tensor& s, const Tensor& y, const char* what) {
  if (!s.same_shape(y)) throw ShapeError(std::string(what) + ": prediction/target shape mismatch");
}

// Area-average pooling of the ground truth to [out_h, out_w]; soft values
// are kept rather than re-thresholded.
Tensor downsample_area(const Tensor& y, std::int64_t out_h, std::int64_t out_w) {
  if (y.rank() != 4) throw ShapeError("ground truth must be [B, 1, H, W]");
  const std::int64_t h = y.dim(2);
  const std::int64_t w = y.dim(3);
  if (h == out_h && w == out_w) return y;
  if (h % out_h != 0 || w % out_w != 0) {
    throw ShapeError("ground truth extents are not an integer multiple of the output extents");
  }
  const std::int64_t fh = h / out_h;
  const std::int64_t fw = w / out_w;
  const std::int64_t batches = y.dim(0);
  const std::int64_t channels = y.dim(1);
  const double inv = 1.0 / static_cast<double>(fh * fw);
  Tensor out({batches, channels, out_h, out_w});
  for (std::int64_t b = 0; b < batches; ++b) {
    for (std::int64_t c = 0; c < channels; ++c) {
      const float* plane = y.ptr() + ((b * channels + c) * h) * w;
      float* oplane = out.ptr() + ((b * channels + c) * out_h) * out_w;
      for (std::int64_t oy = 0; oy < out_h; ++oy) {
        for (std::int64_t ox = 0; ox < out_w; ++ox) {
          double acc = 0.0;
          for (std::int64_t dy = 0; dy < fh; ++dy) {
            const float* row = plane + (oy * fh + dy) * w + ox * fw;
            for (std::int64_t dx = 0; dx < fw; ++dx) acc += row[dx];
          }
          oplane[oy * out_w + ox] = static_cast<float>(acc * inv);
        }
      }
    }
  }
  return out;
}

struct BilinearTap {
  std::int64_t i0, i1;
  double frac;
};

std::vector<BilinearTap> bilinear_taps(std::int64_t src, std::int64_t dst) {
  std::vector<BilinearTap> taps(static_cast<std::size_t>(dst));
  const double scale = static_cast<double>(src) / static_cast<double>(dst);
  for (std::int64_t i = 0; i < dst; ++i) {
    double s = (static_cast<double>(i) + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(src - 1));
    const std::int64_t i0 = static_cast<std::int64_t>(std::floor(s));
    taps[static_cast<std::size_t>(i)] = {i0, std::min<std::int64_t>(i0 + 1, src - 1),
                                         s - static_cast<double>(i0)};
  }
  return taps;
}

// Transpose of bilinear_resize: scatters each output-pixel gradient into its
// four source taps.
Tensor bilinear_backward(const std::vector<double>& grad_out, std::int64_t batches,
                         std::int64_t channels, std::int64_t out_h, std::int64_t out_w,
                         std::int64_t in_h, std::int64_t in_w) {
  const auto ys = bilinear_taps(in_h, out_h);
  const auto xs = bilinear_taps(in_w, out_w);
  std::vector<double> acc(static_cast<std::size_t>(batches * channels * in_h * in_w), 0.0);
  for (std::int64_t b = 0; b < batches; ++b) {
    for (std::int64_t c = 0; c < channels; ++c) {
      const double* gplane = grad_out.data() + ((b * channels + c) * out_h) * out_w;
      double* aplane = acc.data() + ((b * channels + c) * in_h) * in_w;
      for (std::int64_t oy = 0; oy < out_h; ++oy) {
        const BilinearTap& ty = ys[static_cast<std::size_t>(oy)];
        for (std::int64_t ox = 0; ox < out_w; ++ox) {
          const BilinearTap& tx = xs[static_cast<std::size_t>(ox)];
          const double g = gplane[oy * out_w + ox];
          aplane[ty.i0 * in_w + tx.i0] += g * (1.0 - ty.frac) * (1.0 - tx.frac);
          aplane[ty.i0 * in_w + tx.i1] += g * (1.0 - ty.frac) * tx.frac;
          aplane[ty.i1 * in_w + tx.i0] += g * ty.frac * (1.0 - tx.frac);
          aplane[ty.i1 * in_w + tx.i1] += g * ty.frac * tx.frac;
        }
      }
    }
  }
  Tensor out({batches, channels, in_h, in_w});
  for (std::size_t i = 0; i < acc.size(); ++i) out.data[i] = static_cast<float>(acc[i]);
  return out;
}

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

LossValue bce_loss(const Tensor& s, const Tensor& y) {
  check_same(s, y, "bce_loss");
  const std::int64_t n = s.numel();
  LossValue out;
  out.grad.dims = s.dims;
  out.grad.data.resize(s.data.size());
  double acc = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::int64_t i = 0; i < n; ++i) {
    const double sv = std::clamp(static_cast<double>(s.data[static_cast<std::size_t>(i)]), kBceEps,
                                 1.0 - kBceEps);
    const double yv = y.data[static_cast<std::size_t>(i)];
    acc -= yv * std::log(sv) + (1.0 - yv) * std::log(1.0 - sv);
    out.grad.data[static_cast<std::size_t>(i)] =
        static_cast<float>((sv - yv) / (sv * (1.0 - sv)) * inv_n);
  }
  out.value = acc * inv_n;
  return out;
}

LossValue iou_loss(const Tensor& s, const Tensor& y) {
  check_same(s, y, "iou_loss");
  const std::int64_t n = s.numel();
  double inter = 0.0;
  double uni = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double sv = s.data[static_cast<std::size_t>(i)];
    const double yv = y.data[static_cast<std::size_t>(i)];
    inter += sv * yv;
    uni += sv + yv - sv * yv;
  }
  LossValue out;
  out.grad.dims = s.dims;
  out.grad.data.assign(s.data.size(), 0.0f);
  if (uni == 0.0) {
    out.degenerate = true;
    return out;
  }
  out.value = 1.0 - inter / uni;
  const double d2 = uni * uni;
  for (std::int64_t i = 0; i < n; ++i) {
    const double yv = y.data[static_cast<std::size_t>(i)];
    out.grad.data[static_cast<std::size_t>(i)] =
        static_cast<float>(-(yv * uni - inter * (1.0 - yv)) / d2);
  }
  return out;
}

LossBreakdown saliency_loss(const SaliencyOutputs& s, const MaskOutputs& m, const Tensor& y) {
  const std::pair<const char*, const Tensor*> outputs[] = {
      {"s16", &s.s16}, {"s8", &s.s8}, {"s4", &s.s4},
      {"m4", &m.m4},   {"m2", &m.m2}, {"m1", &m.m1},
  };
  LossBreakdown breakdown;
  for (const auto& [key, pred] : outputs) {
    const Tensor target = downsample_area(y, pred->dim(2), pred->dim(3));
    const LossValue bce = bce_loss(*pred, target);
    const LossValue iou = iou_loss(*pred, target);
    breakdown.bce_per_output[key] = bce.value;
    breakdown.iou_per_output[key] = iou.value;
    breakdown.sal += bce.value + iou.value;
  }
  breakdown.total = breakdown.sal;
  return breakdown;
}

ConsistencyPair consistency_pair(const Tensor& coarse, const Tensor& fine, double lambda,
                                 bool detach_finer) {
  if (coarse.rank() != 4 || fine.rank() != 4) throw ShapeError("consistency expects rank-4 maps");
  const std::int64_t batches = fine.dim(0);
  const std::int64_t channels = fine.dim(1);
  const std::int64_t fh = fine.dim(2);
  const std::int64_t fw = fine.dim(3);
  const Tensor up = bilinear_resize(coarse, fh, fw);

  const std::int64_t n = fine.numel();
  const double inv_n = 1.0 / static_cast<double>(n);
  double acc = 0.0;
  std::vector<double> grad_up(static_cast<std::size_t>(n), 0.0);
  ConsistencyPair out;
  out.grad_fine.dims = fine.dims;
  out.grad_fine.data.assign(fine.data.size(), 0.0f);
  for (std::int64_t i = 0; i < n; ++i) {
    const double diff = static_cast<double>(up.data[static_cast<std::size_t>(i)]) -
                        static_cast<double>(fine.data[static_cast<std::size_t>(i)]);
    acc += std::abs(diff);
    if (detach_finer) {
      grad_up[static_cast<std::size_t>(i)] = lambda * sign_of(diff) * inv_n;
    } else {
      out.grad_fine.data[static_cast<std::size_t>(i)] =
          static_cast<float>(-lambda * sign_of(diff) * inv_n);
    }
  }
  out.value = lambda * acc * inv_n;
  if (detach_finer) {
    out.grad_coarse =
        bilinear_backward(grad_up, batches, channels, fh, fw, coarse.dim(2), coarse.dim(3));
  } else {
    out.grad_coarse = Tensor(coarse.dims, 0.0f);
  }
  return out;
}

ConsistencyResult consistency_loss(const SaliencyOutputs& s, double lambda, bool detach_finer) {
  const ConsistencyPair p1 = consistency_pair(s.s16, s.s8, lambda, detach_finer);
  const ConsistencyPair p2 = consistency_pair(s.s8, s.s4, lambda, detach_finer);
  ConsistencyResult out;
  out.value = p1.value + p2.value;
  out.grad_s16 = p1.grad_coarse;
  out.grad_s8 = add(p1.grad_fine, p2.grad_coarse);
  out.grad_s4 = p2.grad_fine;
  return out;
}

LossBreakdown total_loss(const SaliencyOutputs& s, const MaskOutputs& m, const Tensor& y,
                         double lambda, bool detach_finer) {
  LossBreakdown breakdown = saliency_loss(s, m, y);
  breakdown.consistency = consistency_loss(s, lambda, detach_finer).value;
  breakdown.total = breakdown.sal + breakdown.consistency;
  return breakdown;
}

GradCheckReport finite_diff_check(LossKind kind, const Tensor& s, const Tensor& y, double h,
                                  double threshold) {
  if (h < 1e-5 || h > 1e-2) throw ParamError("finite difference step must lie in [1e-5, 1e-2]");

  auto eval = [&](const Tensor& pred) -> double {
    switch (kind) {
      case LossKind::Bce:
        return bce_loss(pred, y).value;
      case LossKind::Iou:
        return iou_loss(pred, y).value;
      case LossKind::Consistency: {
        const Tensor up = bilinear_resize(pred, y.dim(2), y.dim(3));
        double acc = 0.0;
        for (std::size_t i = 0; i < up.data.size(); ++i) {
          acc += std::abs(static_cast<double>(up.data[i]) - static_cast<double>(y.data[i]));
        }
        return acc / static_cast<double>(y.numel());
      }
    }
    return 0.0;
  };

  Tensor analytic;
  switch (kind) {
    case LossKind::Bce:
      analytic = bce_loss(s, y).grad;
      break;
    case LossKind::Iou:
      analytic = iou_loss(s, y).grad;
      break;
    case LossKind::Consistency:
      analytic = consistency_pair(s, y, 1.0, true).grad_coarse;
      break;
  }

  GradCheckReport report;
  Tensor probe = s;
  for (std::int64_t i = 0; i < s.numel(); ++i) {
    const float orig = probe.data[static_cast<std::size_t>(i)];
    const float plus = static_cast<float>(static_cast<double>(orig) + h);
    const float minus = static_cast<float>(static_cast<double>(orig) - h);
    probe.data[static_cast<std::size_t>(i)] = plus;
    const double f_plus = eval(probe);
    probe.data[static_cast<std::size_t>(i)] = minus;
    const double f_minus = eval(probe);
    probe.data[static_cast<std::size_t>(i)] = orig;

    // Divide by the realized float32 step, not the nominal one.
    const double numeric =
        (f_plus - f_minus) / (static_cast<double>(plus) - static_cast<double>(minus));
    const double a = analytic.data[static_cast<std::size_t>(i)];
    const double rel =
        std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
    if (rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_index = i;
    }
  }
  report.pass = report.max_rel_error < threshold;
  return report;
}

}  // namespace sodkit
