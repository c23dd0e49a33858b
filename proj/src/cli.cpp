#include "sodkit/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <json.hpp>

#include "sodkit/config.hpp"
#include "sodkit/eval.hpp"
#include "sodkit/image_io.hpp"
#include "sodkit/model.hpp"
#include "sodkit/selftest.hpp"
#include "sodkit/tensor_io.hpp"

namespace sodkit {

namespace fs = std::filesystem;

namespace {

RunConfig load_config_or_default(const std::string& path) {
  if (path.empty()) return RunConfig{};
  return load_run_config(path);
}

Tensor squeeze_map(const Tensor& t) {
  // [1, 1, H, W] -> [H, W]
  Tensor out({t.dim(2), t.dim(3)});
  out.data = t.data;
  return out;
}

}  // namespace

int cmd_forward(const ForwardArgs& args) {
  try {
    RunConfig cfg = load_config_or_default(args.config);
    if (args.seed.has_value()) cfg.model.seed = *args.seed;
    cfg.model.validate();

    Tensor img = read_image(args.input);
    if (img.dim(0) == 1) {
      const Tensor mono = img;
      img = Tensor({3, mono.dim(1), mono.dim(2)});
      for (int c = 0; c < 3; ++c) {
        std::copy(mono.data.begin(), mono.data.end(),
                  img.data.begin() + static_cast<std::ptrdiff_t>(c * mono.numel()));
      }
    }
    Tensor rgb({1, 3, img.dim(1), img.dim(2)});
    rgb.data = img.data;
    rgb = bilinear_resize(rgb, cfg.model.input_h, cfg.model.input_w);

    ModalityInputs inputs;
    inputs.rgb = std::move(rgb);
    if (!args.depth.empty()) {
      const Tensor dgray = to_gray(read_image(args.depth));
      Tensor depth({1, 1, dgray.dim(0), dgray.dim(1)});
      depth.data = dgray.data;
      inputs.depth = bilinear_resize(depth, cfg.model.input_h, cfg.model.input_w);
    }

    const ModelParams params = ModelParams::init(cfg.model);
    const auto [sal, masks] = model_forward(inputs, params, cfg.model);

    write_image_gray(args.out, squeeze_map(masks.m1));

    if (!args.dump_dir.empty()) {
      fs::create_directories(args.dump_dir);
      const fs::path dir(args.dump_dir);
      write_tensor((dir / "s_16.dupt").string(), sal.s16);
      write_tensor((dir / "s_8.dupt").string(), sal.s8);
      write_tensor((dir / "s_4.dupt").string(), sal.s4);
      write_tensor((dir / "m_4.dupt").string(), masks.m4);
      write_tensor((dir / "m_2.dupt").string(), masks.m2);
      write_tensor((dir / "m_1.dupt").string(), masks.m1);
    }
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << "sodkit forward: " << e.what() << "\n";
    return kExitData;
  }
}

int cmd_eval(const EvalArgs& args) {
  try {
    RunConfig cfg = load_config_or_default(args.config);
    if (args.beta2.has_value()) cfg.metrics.beta2 = *args.beta2;
    if (args.threshold.has_value()) cfg.metrics.iou_threshold = *args.threshold;

    EvalOptions opt;
    opt.pred_dir = args.pred_dir;
    opt.gt_dir = args.gt_dir;
    opt.resize_pred = args.resize_pred;
    opt.metrics = cfg.metrics;
    const EvalResult result = evaluate_directories(opt);

    nlohmann::json report;
    report["config"] = run_config_to_json(cfg);
    nlohmann::json images = nlohmann::json::array();
    for (const EvalRow& row : result.rows) {
      images.push_back({{"name", row.name},
                        {"mae", row.metrics.mae},
                        {"msiou", row.metrics.msiou},
                        {"s_measure", row.metrics.s_measure},
                        {"weighted_f", row.metrics.weighted_f}});
    }
    report["images"] = std::move(images);
    report["aggregate"] = {{"mae", result.aggregate.mae},
                           {"msiou", result.aggregate.msiou},
                           {"s_measure", result.aggregate.s_measure},
                           {"weighted_f", result.aggregate.weighted_f},
                           {"n_images", result.aggregate.n_images}};
    report["warnings"] = result.warnings;

    std::ofstream out(args.out);
    if (!out) throw Error(args.out + ": cannot open for writing");
    out << report.dump(2) << "\n";

    for (const std::string& warning : result.warnings) {
      std::cerr << "warning: " << warning << "\n";
    }
    std::cout << "evaluated " << result.aggregate.n_images << " image(s): mae="
              << result.aggregate.mae << " msiou=" << result.aggregate.msiou
              << " s_measure=" << result.aggregate.s_measure
              << " weighted_f=" << result.aggregate.weighted_f << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "sodkit eval: " << e.what() << "\n";
    return kExitData;
  }
}

int cmd_pr(const PrArgs& args) {
  try {
    EvalOptions opt;
    opt.pred_dir = args.pred_dir;
    opt.gt_dir = args.gt_dir;
    const PrResult result = pr_directories(opt);

    std::ofstream out(args.out);
    if (!out) throw Error(args.out + ": cannot open for writing");
    out << "threshold,precision,recall\n";
    out << std::setprecision(17);
    for (int k = 0; k < PrCurve::kThresholds; ++k) {
      out << static_cast<double>(k) / 255.0 << ","
          << result.curve.precision[static_cast<std::size_t>(k)] << ","
          << result.curve.recall[static_cast<std::size_t>(k)] << "\n";
    }
    for (const std::string& warning : result.warnings) {
      std::cerr << "warning: " << warning << "\n";
    }
    std::cout << "pr curve over " << result.n_images << " image(s) written to " << args.out << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "sodkit pr: " << e.what() << "\n";
    return kExitData;
  }
}

int cmd_selftest(const SelftestArgs& args) {
  const auto start = std::chrono::steady_clock::now();
  SelftestOptions opt;
  opt.inject_gradient_bug = args.inject_bug;
  const std::vector<CheckResult> results = run_selftest(opt);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  bool all_pass = true;
  for (const CheckResult& r : results) {
    std::cout << (r.pass ? "PASS" : "FAIL") << "  " << std::left << std::setw(42) << r.name
              << "  " << r.detail << "\n";
    all_pass = all_pass && r.pass;
  }
  std::cout << (all_pass ? "OK" : "FAILED") << " (" << results.size() << " suites, "
            << std::fixed << std::setprecision(2) << elapsed << " s)\n";
  return all_pass ? kExitOk : kExitSelftest;
}

}  // namespace sodkit
