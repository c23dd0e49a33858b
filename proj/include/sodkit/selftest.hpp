#pragma once

#include <string>
#include <vector>

#include "sodkit/tensor.hpp"

namespace sodkit {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct SelftestOptions {
  // Corrupts the analytic BCE gradient before comparing against finite
  // differences; the gradient check must then fail. Used to prove the
  // harness can actually detect a broken gradient.
  bool inject_gradient_bug = false;
};

// Runs every oracle suite (graph construction, normalization, propagation,
// gating, attention, modality fusion, loss values, gradient checks, metric
// oracles) and returns one result per suite.
std::vector<CheckResult> run_selftest(const SelftestOptions& opt = {});

// Deterministic metric fixtures shared by the selftest, the unit tests and
// the reference script that regenerates the golden values.
struct MetricFixture {
  Tensor pred;  // [32, 32] in [0, 1]
  Tensor gt;    // [32, 32] binary
};

MetricFixture fixture_speckle();
MetricFixture fixture_blob();
MetricFixture fixture_inverse();

// Values produced by tests/ref/ref_metrics.py on the fixtures above.
struct MetricGoldens {
  double s_measure_speckle;
  double s_measure_blob;
  double s_measure_perfect;
  double weighted_f_speckle;
  double weighted_f_blob;
  double weighted_f_inverse;
};

const MetricGoldens& metric_goldens();

}  // namespace sodkit
