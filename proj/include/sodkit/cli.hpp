#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace sodkit {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitSelftest = 3;

struct ForwardArgs {
  std::string input;
  std::string depth;    // optional
  std::string config;   // optional; defaults apply
  std::string out;
  std::string dump_dir; // optional
  std::optional<std::uint64_t> seed;
};

struct EvalArgs {
  std::string pred_dir;
  std::string gt_dir;
  std::string config;  // optional
  std::string out;
  bool resize_pred = false;
  std::optional<double> beta2;
  std::optional<double> threshold;
};

struct PrArgs {
  std::string pred_dir;
  std::string gt_dir;
  std::string out;
};

struct SelftestArgs {
  bool inject_bug = false;
};

int cmd_forward(const ForwardArgs& args);
int cmd_eval(const EvalArgs& args);
int cmd_pr(const PrArgs& args);
int cmd_selftest(const SelftestArgs& args);

}  // namespace sodkit
