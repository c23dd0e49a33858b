#include <CLI11.hpp>

#include "sodkit/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"salient-object-detection toolkit: forward pass, evaluation, PR curves"};
  app.require_subcommand(1);

  sodkit::ForwardArgs forward_args;
  CLI::App* forward = app.add_subcommand("forward", "run the network on one image");
  forward->add_option("--input", forward_args.input, "input image (P5/P6 netpbm)")->required();
  forward->add_option("--depth", forward_args.depth, "optional depth map (P5)");
  forward->add_option("--config", forward_args.config, "JSON config file");
  forward->add_option("--out", forward_args.out, "output saliency image (P5)")->required();
  forward->add_option("--dump", forward_args.dump_dir, "directory for raw tensor dumps");
  std::uint64_t seed_value = 0;
  CLI::Option* seed_opt = forward->add_option("--seed", seed_value, "parameter seed override");

  sodkit::EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "score predictions against ground truth");
  eval->add_option("--pred", eval_args.pred_dir, "prediction directory")->required();
  eval->add_option("--gt", eval_args.gt_dir, "ground-truth directory")->required();
  eval->add_option("--config", eval_args.config, "JSON config file");
  eval->add_option("--out", eval_args.out, "JSON report path")->required();
  eval->add_flag("--resize-pred", eval_args.resize_pred,
                 "bilinearly resize predictions to the ground-truth size");
  double beta2 = 0.0;
  double threshold = 0.0;
  CLI::Option* beta2_opt = eval->add_option("--beta2", beta2, "weighted-F beta^2 override");
  CLI::Option* thresh_opt = eval->add_option("--threshold", threshold, "mSIOU threshold override");

  sodkit::PrArgs pr_args;
  CLI::App* pr = app.add_subcommand("pr", "precision-recall curve over 256 thresholds");
  pr->add_option("--pred", pr_args.pred_dir, "prediction directory")->required();
  pr->add_option("--gt", pr_args.gt_dir, "ground-truth directory")->required();
  pr->add_option("--out", pr_args.out, "CSV output path")->required();

  sodkit::SelftestArgs selftest_args;
  CLI::App* selftest = app.add_subcommand("selftest", "run the built-in oracle suites");
  selftest->add_flag("--inject-bug", selftest_args.inject_bug)->group("");  // test hook

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return sodkit::kExitUsage;
  }

  if (forward->parsed()) {
    if (seed_opt->count() > 0) forward_args.seed = seed_value;
    return sodkit::cmd_forward(forward_args);
  }
  if (eval->parsed()) {
    if (beta2_opt->count() > 0) eval_args.beta2 = beta2;
    if (thresh_opt->count() > 0) eval_args.threshold = threshold;
    return sodkit::cmd_eval(eval_args);
  }
  if (pr->parsed()) return sodkit::cmd_pr(pr_args);
  if (selftest->parsed()) return sodkit::cmd_selftest(selftest_args);
  return sodkit::kExitUsage;
}
