#include "sodkit/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <mutex>
#include <thread>

#include "sodkit/image_io.hpp"

namespace sodkit {

namespace fs = std::filesystem;

namespace {

bool is_netpbm(const fs::path& p) {
  const std::string ext = p.extension().string();
  return ext == ".pgm" || ext == ".ppm" || ext == ".pnm";
}

std::map<std::string, fs::path> index_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) throw Error(dir + ": not a directory");
  std::map<std::string, fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || !is_netpbm(entry.path())) continue;
    out[entry.path().stem().string()] = entry.path();
  }
  return out;
}

struct Pair {
  std::string name;
  fs::path pred;
  fs::path gt;
};

std::vector<Pair> match_pairs(const EvalOptions& opt, std::vector<std::string>& warnings) {
  const auto preds = index_dir(opt.pred_dir);
  const auto gts = index_dir(opt.gt_dir);
  std::vector<Pair> pairs;
  for (const auto& [stem, path] : preds) {
    const auto it = gts.find(stem);
    if (it == gts.end()) {
      warnings.push_back("prediction '" + stem + "' has no ground truth; skipped");
      continue;
    }
    pairs.push_back({stem, path, it->second});
  }
  for (const auto& [stem, path] : gts) {
    if (preds.find(stem) == preds.end()) {
      warnings.push_back("ground truth '" + stem + "' has no prediction; skipped");
    }
  }
  return pairs;  // std::map iteration keeps them name-sorted
}

struct LoadedPair {
  Tensor pred;  // [H, W] in [0, 1]
  Tensor gt;    // [H, W] binary
};

LoadedPair load_pair(const Pair& pair, const EvalOptions& opt) {
  Tensor pred = to_gray(read_image(pair.pred.string()));
  const Tensor gt = binarize_gt(to_gray(read_image(pair.gt.string())));
  if (!pred.same_shape(gt)) {
    if (!opt.resize_pred) {
      throw Error("size mismatch for '" + pair.name + "' (" + std::to_string(pred.dim(0)) + "x" +
                  std::to_string(pred.dim(1)) + " vs " + std::to_string(gt.dim(0)) + "x" +
                  std::to_string(gt.dim(1)) + "); pass --resize-pred to resample predictions");
    }
    Tensor wrapped({1, 1, pred.dim(0), pred.dim(1)});
    wrapped.data = pred.data;
    const Tensor resized = bilinear_resize(wrapped, gt.dim(0), gt.dim(1));
    pred = Tensor({gt.dim(0), gt.dim(1)});
    pred.data = resized.data;
  }
  return {std::move(pred), std::move(gt)};
}

template <typename Fn>
void parallel_for(std::int64_t n, int threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> cursor{0};
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const int workers = static_cast<int>(std::min<std::int64_t>(threads, n));
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      while (true) {
        const std::int64_t i = cursor.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

int worker_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SODKIT_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

Tensor to_gray(const Tensor& img) {
  if (img.rank() == 2) return img;
  if (img.rank() != 3) throw ShapeError("expected [C, H, W] image tensor");
  const std::int64_t h = img.dim(1);
  const std::int64_t w = img.dim(2);
  Tensor out({h, w});
  if (img.dim(0) == 1) {
    out.data = img.data;
    return out;
  }
  if (img.dim(0) != 3) throw ShapeError("expected 1 or 3 channels");
  const std::int64_t plane = h * w;
  for (std::int64_t i = 0; i < plane; ++i) {
    out.data[static_cast<std::size_t>(i)] =
        static_cast<float>(0.299 * img.ptr()[i] + 0.587 * img.ptr()[plane + i] +
                           0.114 * img.ptr()[2 * plane + i]);
  }
  return out;
}

Tensor binarize_gt(const Tensor& gray) {
  Tensor out;
  out.dims = gray.dims;
  out.data.resize(gray.data.size());
  for (std::size_t i = 0; i < gray.data.size(); ++i) {
    out.data[i] = gray.data[i] >= 0.5f ? 1.0f : 0.0f;
  }
  return out;
}

EvalResult evaluate_directories(const EvalOptions& opt) {
  opt.metrics.validate();
  EvalResult result;
  const std::vector<Pair> pairs = match_pairs(opt, result.warnings);
  if (pairs.empty()) throw Error("no prediction/ground-truth pairs found");

  std::vector<ImageMetrics> metrics(pairs.size());
  std::vector<char> empty_gt(pairs.size(), 0);
  parallel_for(static_cast<std::int64_t>(pairs.size()), worker_count(opt.threads),
               [&](std::int64_t i) {
                 const LoadedPair loaded = load_pair(pairs[static_cast<std::size_t>(i)], opt);
                 ImageMetrics m;
                 m.mae = mae(loaded.pred, loaded.gt);
                 m.msiou = msiou(loaded.pred, loaded.gt, opt.metrics.iou_threshold);
                 m.s_measure = s_measure(loaded.pred, loaded.gt, opt.metrics.alpha_s);
                 const WeightedFResult wf = weighted_f(loaded.pred, loaded.gt, opt.metrics.beta2);
                 m.weighted_f = wf.value;
                 empty_gt[static_cast<std::size_t>(i)] = wf.empty_gt ? 1 : 0;
                 metrics[static_cast<std::size_t>(i)] = m;
               });

  result.rows.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    result.rows.push_back({pairs[i].name, metrics[i]});
    if (empty_gt[i]) {
      result.warnings.push_back("ground truth '" + pairs[i].name +
                                "' has no foreground; weighted_f scored 0");
    }
  }
  result.aggregate = aggregate(metrics);
  return result;
}

PrResult pr_directories(const EvalOptions& opt) {
  PrResult result;
  std::vector<std::string> warnings;
  const std::vector<Pair> pairs = match_pairs(opt, warnings);
  if (pairs.empty()) throw Error("no prediction/ground-truth pairs found");

  std::vector<PrCurve> curves(pairs.size());
  parallel_for(static_cast<std::int64_t>(pairs.size()), worker_count(opt.threads),
               [&](std::int64_t i) {
                 const LoadedPair loaded = load_pair(pairs[static_cast<std::size_t>(i)], opt);
                 curves[static_cast<std::size_t>(i)] = pr_curve(loaded.pred, loaded.gt);
               });
  result.curve = mean_curve(curves);
  result.n_images = static_cast<std::int64_t>(pairs.size());
  result.warnings = std::move(warnings);
  return result;
}

}  // namespace sodkit
