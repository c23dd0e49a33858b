#include "sodkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sodkit {

namespace {

constexpr double kEps = 2.220446049250313e-16;

void check_pair(const Tensor& p, const Tensor& g, const char* what) {
  if (p.rank() != 2 || g.rank() != 2) throw ShapeError(std::string(what) + ": maps must be [H, W]");
  if (!p.same_shape(g)) throw ShapeError(std::string(what) + ": shape mismatch");
}

void check_binary(const Tensor& g, const char* what) {
  for (float v : g.data) {
    if (v != 0.0f && v != 1.0f) throw ParamError(std::string(what) + ": ground truth must be binary");
  }
}

double mean_of(const Tensor& t) {
  double acc = 0.0;
  for (float v : t.data) acc += v;
  return acc / static_cast<double>(t.numel());
}

double round_half_up(double v) { return std::floor(v + 0.5); }

// Foreground/background contrast score of the structure measure.
double object_score(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double sigma = 0.0;
  if (n > 1) {
    double acc = 0.0;
    for (double v : values) acc += (v - mean) * (v - mean);
    sigma = std::sqrt(acc / static_cast<double>(n - 1));
  }
  return 2.0 * mean / (mean * mean + 1.0 + sigma + kEps);
}

// Region SSIM of the structure measure (sample variances over N - 1 + eps).
double region_ssim(const float* p, const float* g, std::int64_t h, std::int64_t w,
                   std::int64_t row0, std::int64_t row1, std::int64_t col0, std::int64_t col1,
                   std::int64_t stride) {
  (void)h;
  (void)w;
  const std::int64_t n = (row1 - row0) * (col1 - col0);
  if (n <= 0) return 0.0;
  double mx = 0.0, my = 0.0;
  for (std::int64_t r = row0; r < row1; ++r) {
    for (std::int64_t c = col0; c < col1; ++c) {
      mx += p[r * stride + c];
      my += g[r * stride + c];
    }
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::int64_t r = row0; r < row1; ++r) {
    for (std::int64_t c = col0; c < col1; ++c) {
      const double dx = p[r * stride + c] - mx;
      const double dy = g[r * stride + c] - my;
      sxx += dx * dx;
      syy += dy * dy;
      sxy += dx * dy;
    }
  }
  const double denom = static_cast<double>(n - 1) + kEps;
  sxx /= denom;
  syy /= denom;
  sxy /= denom;

  const double a = 4.0 * mx * my * sxy;
  const double b = (mx * mx + my * my) * (sxx + syy);
  if (a != 0.0) return a / (b + kEps);
  if (b == 0.0) return 1.0;
  return 0.0;
}

}  // namespace

void MetricConfig::validate() const {
  if (!(beta2 > 0.0)) throw ParamError("beta2 must be positive");
  if (alpha_s < 0.0 || alpha_s > 1.0) throw ParamError("alpha_s must lie in [0, 1]");
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
    throw ParamError("iou_threshold must lie in (0, 1)");
  }
}

double mae(const Tensor& p, const Tensor& g) {
  check_pair(p, g, "mae");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.data.size(); ++i) {
    acc += std::abs(static_cast<double>(p.data[i]) - static_cast<double>(g.data[i]));
  }
  return acc / static_cast<double>(p.numel());
}

double msiou(const Tensor& p, const Tensor& g, double threshold) {
  check_pair(p, g, "msiou");
  check_binary(g, "msiou");
  std::int64_t inter = 0;
  std::int64_t uni = 0;
  for (std::size_t i = 0; i < p.data.size(); ++i) {
    const bool pb = static_cast<double>(p.data[i]) >= threshold;
    const bool gb = g.data[i] != 0.0f;
    inter += (pb && gb) ? 1 : 0;
    uni += (pb || gb) ? 1 : 0;
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double s_measure(const Tensor& p, const Tensor& g, double alpha_s) {
  check_pair(p, g, "s_measure");
  check_binary(g, "s_measure");
  const std::int64_t h = p.dim(0);
  const std::int64_t w = p.dim(1);
  const double mu = mean_of(g);
  if (mu == 0.0) return 1.0 - mean_of(p);
  if (mu == 1.0) return mean_of(p);

  // Object term.
  std::vector<double> fg, bg;
  fg.reserve(p.data.size());
  bg.reserve(p.data.size());
  for (std::size_t i = 0; i < p.data.size(); ++i) {
    if (g.data[i] != 0.0f) {
      fg.push_back(p.data[i]);
    } else {
      bg.push_back(1.0 - static_cast<double>(p.data[i]));
    }
  }
  const double s_o = mu * object_score(fg) + (1.0 - mu) * object_score(bg);

  // Region term: split at the rounded foreground centroid (1-based
  // coordinates, half-up rounding) and blend quadrant SSIMs by area.
  double total = 0.0, col_moment = 0.0, row_moment = 0.0;
  for (std::int64_t r = 0; r < h; ++r) {
    for (std::int64_t c = 0; c < w; ++c) {
      if (g.at(r, c) != 0.0f) {
        total += 1.0;
        row_moment += static_cast<double>(r + 1);
        col_moment += static_cast<double>(c + 1);
      }
    }
  }
  const std::int64_t cx = static_cast<std::int64_t>(round_half_up(col_moment / total));
  const std::int64_t cy = static_cast<std::int64_t>(round_half_up(row_moment / total));

  const double area = static_cast<double>(h * w);
  const double w1 = static_cast<double>(cx * cy) / area;
  const double w2 = static_cast<double>((w - cx) * cy) / area;
  const double w3 = static_cast<double>(cx * (h - cy)) / area;
  const double w4 = 1.0 - w1 - w2 - w3;

  const float* pp = p.ptr();
  const float* gp = g.ptr();
  const double q1 = region_ssim(pp, gp, h, w, 0, cy, 0, cx, w);
  const double q2 = region_ssim(pp, gp, h, w, 0, cy, cx, w, w);
  const double q3 = region_ssim(pp, gp, h, w, cy, h, 0, cx, w);
  const double q4 = region_ssim(pp, gp, h, w, cy, h, cx, w, w);
  const double s_r = w1 * q1 + w2 * q2 + w3 * q3 + w4 * q4;

  const double s = alpha_s * s_o + (1.0 - alpha_s) * s_r;
  return s < 0.0 ? 0.0 : s;
}

namespace {

// Exact Euclidean distance transform of the background with the index of the
// nearest foreground pixel. Ties resolve to the smallest (row, col).
struct DistanceField {
  std::vector<double> dist;          // 0 at foreground
  std::vector<std::int64_t> nearest; // row-major index; -1 at foreground
};

DistanceField distance_to_foreground(const Tensor& g) {
  const std::int64_t h = g.dim(0);
  const std::int64_t w = g.dim(1);
  DistanceField out;
  out.dist.assign(static_cast<std::size_t>(h * w), 0.0);
  out.nearest.assign(static_cast<std::size_t>(h * w), -1);

  // Nearest foreground row within each column (ties toward the smaller row).
  std::vector<std::int64_t> col_row(static_cast<std::size_t>(h * w), -1);
  for (std::int64_t c = 0; c < w; ++c) {
    std::int64_t last = -1;
    for (std::int64_t r = 0; r < h; ++r) {
      if (g.at(r, c) != 0.0f) last = r;
      col_row[static_cast<std::size_t>(r * w + c)] = last;
    }
    std::int64_t next = -1;
    for (std::int64_t r = h - 1; r >= 0; --r) {
      if (g.at(r, c) != 0.0f) next = r;
      const std::int64_t up = col_row[static_cast<std::size_t>(r * w + c)];
      if (up < 0) {
        col_row[static_cast<std::size_t>(r * w + c)] = next;
      } else if (next >= 0 && (next - r) < (r - up)) {
        col_row[static_cast<std::size_t>(r * w + c)] = next;
      }
    }
  }

  for (std::int64_t r = 0; r < h; ++r) {
    for (std::int64_t c = 0; c < w; ++c) {
      if (g.at(r, c) != 0.0f) continue;
      std::int64_t best_d2 = std::numeric_limits<std::int64_t>::max();
      std::int64_t best_r = -1, best_c = -1;
      for (std::int64_t cc = 0; cc < w; ++cc) {
        const std::int64_t nr = col_row[static_cast<std::size_t>(r * w + cc)];
        if (nr < 0) continue;
        const std::int64_t d2 = (r - nr) * (r - nr) + (c - cc) * (c - cc);
        if (d2 < best_d2 || (d2 == best_d2 && nr < best_r)) {
          best_d2 = d2;
          best_r = nr;
          best_c = cc;
        }
      }
      out.dist[static_cast<std::size_t>(r * w + c)] = std::sqrt(static_cast<double>(best_d2));
      out.nearest[static_cast<std::size_t>(r * w + c)] = best_r * w + best_c;
    }
  }
  return out;
}

// 7x7 Gaussian (sigma 5), normalized; correlation with zero padding.
std::vector<double> gaussian_smooth(const std::vector<double>& src, std::int64_t h, std::int64_t w) {
  constexpr int kRadius = 3;
  double kernel[7][7];
  double sum = 0.0;
  for (int dy = -kRadius; dy <= kRadius; ++dy) {
    for (int dx = -kRadius; dx <= kRadius; ++dx) {
      const double v = std::exp(-(dy * dy + dx * dx) / (2.0 * 25.0));
      kernel[dy + kRadius][dx + kRadius] = v;
      sum += v;
    }
  }
  for (auto& row : kernel) {
    for (double& v : row) v /= sum;
  }

  std::vector<double> out(src.size(), 0.0);
  for (std::int64_t r = 0; r < h; ++r) {
    for (std::int64_t c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int dy = -kRadius; dy <= kRadius; ++dy) {
        const std::int64_t rr = r + dy;
        if (rr < 0 || rr >= h) continue;
        for (int dx = -kRadius; dx <= kRadius; ++dx) {
          const std::int64_t cc = c + dx;
          if (cc < 0 || cc >= w) continue;
          acc += src[static_cast<std::size_t>(rr * w + cc)] * kernel[dy + kRadius][dx + kRadius];
        }
      }
      out[static_cast<std::size_t>(r * w + c)] = acc;
    }
  }
  return out;
}

}  // namespace

WeightedFResult weighted_f(const Tensor& p, const Tensor& g, double beta2) {
  check_pair(p, g, "weighted_f");
  check_binary(g, "weighted_f");
  const std::int64_t h = p.dim(0);
  const std::int64_t w = p.dim(1);
  const std::int64_t n = h * w;

  std::int64_t n_fg = 0;
  for (float v : g.data) n_fg += v != 0.0f ? 1 : 0;
  if (n_fg == 0) return {0.0, true};

  std::vector<double> err(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    err[static_cast<std::size_t>(i)] = std::abs(static_cast<double>(p.data[static_cast<std::size_t>(i)]) -
                                                static_cast<double>(g.data[static_cast<std::size_t>(i)]));
  }

  const DistanceField field = distance_to_foreground(g);

  // Background errors take the value at their nearest foreground pixel so
  // smoothing does not bleed raw background error across the boundary.
  std::vector<double> err_t = err;
  for (std::int64_t i = 0; i < n; ++i) {
    if (g.data[static_cast<std::size_t>(i)] == 0.0f) {
      err_t[static_cast<std::size_t>(i)] = err[static_cast<std::size_t>(field.nearest[static_cast<std::size_t>(i)])];
    }
  }
  const std::vector<double> smoothed = gaussian_smooth(err_t, h, w);

  const double decay = std::log(0.5) / 5.0;
  double sum_fg_ew = 0.0;
  double sum_bg_ew = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const bool fg = g.data[static_cast<std::size_t>(i)] != 0.0f;
    double e = err[static_cast<std::size_t>(i)];
    if (fg && smoothed[static_cast<std::size_t>(i)] < e) e = smoothed[static_cast<std::size_t>(i)];
    if (fg) {
      sum_fg_ew += e;  // importance weight 1 on the foreground
    } else {
      const double b = 2.0 - std::exp(decay * field.dist[static_cast<std::size_t>(i)]);
      sum_bg_ew += e * b;
    }
  }

  const double tpw = static_cast<double>(n_fg) - sum_fg_ew;
  const double fpw = sum_bg_ew;
  const double recall = 1.0 - sum_fg_ew / static_cast<double>(n_fg);
  const double precision = tpw / (kEps + tpw + fpw);
  const double f =
      (1.0 + beta2) * precision * recall / (kEps + beta2 * precision + recall);
  return {f, false};
}

PrCurve pr_curve(const Tensor& p, const Tensor& g) {
  check_pair(p, g, "pr_curve");
  check_binary(g, "pr_curve");

  // Threshold grid in float32 so 8-bit quantized predictions align exactly.
  std::array<double, PrCurve::kThresholds> thresholds;
  for (int k = 0; k < PrCurve::kThresholds; ++k) {
    thresholds[static_cast<std::size_t>(k)] =
        static_cast<double>(static_cast<float>(static_cast<double>(k) / 255.0));
  }

  std::array<std::int64_t, PrCurve::kThresholds> fg_bucket{};
  std::array<std::int64_t, PrCurve::kThresholds> all_bucket{};
  std::int64_t n_fg = 0;
  for (std::size_t i = 0; i < p.data.size(); ++i) {
    const double v = p.data[i];
    const auto it = std::upper_bound(thresholds.begin(), thresholds.end(), v);
    const std::int64_t count = it - thresholds.begin();  // thresholds satisfied, >= 1
    const std::size_t bucket = static_cast<std::size_t>(count - 1);
    all_bucket[bucket] += 1;
    if (g.data[i] != 0.0f) {
      fg_bucket[bucket] += 1;
      ++n_fg;
    }
  }

  PrCurve curve;
  std::int64_t tp = 0;
  std::int64_t predicted = 0;
  for (int k = PrCurve::kThresholds - 1; k >= 0; --k) {
    tp += fg_bucket[static_cast<std::size_t>(k)];
    predicted += all_bucket[static_cast<std::size_t>(k)];
    curve.precision[static_cast<std::size_t>(k)] =
        predicted > 0 ? static_cast<double>(tp) / static_cast<double>(predicted) : 1.0;
    curve.recall[static_cast<std::size_t>(k)] =
        n_fg > 0 ? static_cast<double>(tp) / static_cast<double>(n_fg) : 1.0;
  }
  return curve;
}

ImageMetrics compute_image_metrics(const Tensor& p, const Tensor& g, const MetricConfig& cfg) {
  ImageMetrics m;
  m.mae = mae(p, g);
  m.msiou = msiou(p, g, cfg.iou_threshold);
  m.s_measure = s_measure(p, g, cfg.alpha_s);
  m.weighted_f = weighted_f(p, g, cfg.beta2).value;
  return m;
}

MetricReport aggregate(const std::vector<ImageMetrics>& images) {
  if (images.empty()) throw ParamError("aggregate requires at least one image");
  MetricReport r;
  for (const ImageMetrics& m : images) {
    r.mae += m.mae;
    r.msiou += m.msiou;
    r.s_measure += m.s_measure;
    r.weighted_f += m.weighted_f;
  }
  const double inv = 1.0 / static_cast<double>(images.size());
  r.mae *= inv;
  r.msiou *= inv;
  r.s_measure *= inv;
  r.weighted_f *= inv;
  r.n_images = static_cast<std::int64_t>(images.size());
  return r;
}

PrCurve mean_curve(const std::vector<PrCurve>& curves) {
  if (curves.empty()) throw ParamError("mean_curve requires at least one curve");
  PrCurve out;
  for (const PrCurve& c : curves) {
    for (int k = 0; k < PrCurve::kThresholds; ++k) {
      out.precision[static_cast<std::size_t>(k)] += c.precision[static_cast<std::size_t>(k)];
      out.recall[static_cast<std::size_t>(k)] += c.recall[static_cast<std::size_t>(k)];
    }
  }
  const double inv = 1.0 / static_cast<double>(curves.size());
  for (int k = 0; k < PrCurve::kThresholds; ++k) {
    out.precision[static_cast<std::size_t>(k)] *= inv;
    out.recall[static_cast<std::size_t>(k)] *= inv;
  }
  return out;
}

}  // namespace sodkit
