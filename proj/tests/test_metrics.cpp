#include <doctest.h>

#include <cmath>

#include "sodkit/metrics.hpp"
#include "sodkit/selftest.hpp"

using namespace sodkit;

namespace {

Tensor random_pred(Prng& rng, std::int64_t h, std::int64_t w) {
  Tensor t({h, w});
  for (auto& v : t.data) {
    v = static_cast<float>(static_cast<double>(rng.next() % 256) / 255.0);
  }
  return t;
}

Tensor random_mask(Prng& rng, std::int64_t h, std::int64_t w) {
  Tensor t({h, w});
  for (auto& v : t.data) v = rng.next() % 2 ? 1.0f : 0.0f;
  return t;
}

}  // namespace

TEST_SUITE_BEGIN("metrics");

TEST_CASE("mae reference cases") {
  Prng rng(81);
  const Tensor g = random_mask(rng, 8, 8);
  CHECK(mae(g, g) == 0.0);

  Tensor inv = g;
  for (auto& v : inv.data) v = 1.0f - v;
  CHECK(mae(inv, g) == doctest::Approx(1.0));

  const Tensor p = Tensor::from({2, 2}, {0.2f, 0.8f, 0.5f, 0.0f});
  const Tensor y = Tensor::from({2, 2}, {0.0f, 1.0f, 1.0f, 0.0f});
  CHECK(mae(p, y) == doctest::Approx(0.225).epsilon(1e-6));

  CHECK_THROWS_AS(mae(p, Tensor({3, 3})), ShapeError);
}

TEST_CASE("mae complement identity for binary ground truth") {
  Prng rng(82);
  const Tensor p = random_pred(rng, 16, 16);
  const Tensor g = random_mask(rng, 16, 16);
  Tensor pc = p;
  for (auto& v : pc.data) v = 1.0f - v;
  CHECK(mae(p, g) + mae(pc, g) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("msiou reference cases") {
  Prng rng(83);
  const Tensor g = random_mask(rng, 8, 8);
  CHECK(msiou(g, g, 0.5) == 1.0);

  // Prediction covers exactly half of the ground truth, no false positives.
  Tensor gt({2, 2});
  gt.data = {1.0f, 1.0f, 0.0f, 0.0f};
  Tensor half({2, 2});
  half.data = {1.0f, 0.0f, 0.0f, 0.0f};
  CHECK(msiou(half, gt, 0.5) == doctest::Approx(0.5));

  const Tensor empty({4, 4});
  CHECK(msiou(empty, empty, 0.5) == 1.0);

  Tensor soft({2, 2});
  soft.data = {0.2f, 0.8f, 0.5f, 0.1f};
  CHECK_THROWS_AS(msiou(gt, soft, 0.5), ParamError);
}

TEST_CASE("msiou equals direct pixel counting on random fixtures") {
  Prng rng(84);
  for (int inst = 0; inst < 10; ++inst) {
    const Tensor p = random_pred(rng, 16, 16);
    const Tensor g = random_mask(rng, 16, 16);
    std::int64_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < p.data.size(); ++i) {
      const bool pb = static_cast<double>(p.data[i]) >= 0.5;
      const bool gb = g.data[i] != 0.0f;
      inter += (pb && gb) ? 1 : 0;
      uni += (pb || gb) ? 1 : 0;
    }
    const double expect = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
    CHECK(msiou(p, g, 0.5) == expect);
  }
}

TEST_CASE("s-measure degenerate rules and goldens") {
  const Tensor zeros({8, 8});
  CHECK(s_measure(zeros, zeros, 0.5) == doctest::Approx(1.0));
  const Tensor ones({8, 8}, 1.0f);
  CHECK(s_measure(ones, zeros, 0.5) == doctest::Approx(0.0));
  CHECK(s_measure(ones, ones, 0.5) == doctest::Approx(1.0));

  const MetricGoldens& gold = metric_goldens();
  const MetricFixture speckle = fixture_speckle();
  const MetricFixture blob = fixture_blob();
  CHECK(s_measure(speckle.pred, speckle.gt, 0.5) ==
        doctest::Approx(gold.s_measure_speckle).epsilon(1e-9));
  CHECK(s_measure(blob.pred, blob.gt, 0.5) == doctest::Approx(gold.s_measure_blob).epsilon(1e-9));

  // A perfect binary prediction with mixed foreground sits just below 1.
  const double perfect = s_measure(blob.gt, blob.gt, 0.5);
  CHECK(perfect == doctest::Approx(gold.s_measure_perfect).epsilon(1e-9));
  CHECK(perfect > 0.9);
  CHECK(perfect <= 1.0);
}

TEST_CASE("weighted F reference behavior") {
  const MetricFixture blob = fixture_blob();
  // Perfect prediction.
  CHECK(weighted_f(blob.gt, blob.gt, 0.3).value == doctest::Approx(1.0).epsilon(1e-6));

  // Inverted prediction golden.
  const MetricFixture inverse = fixture_inverse();
  CHECK(weighted_f(inverse.pred, inverse.gt, 0.3).value ==
        doctest::Approx(metric_goldens().weighted_f_inverse).epsilon(1e-9));

  // Empty ground truth is flagged and scored 0.
  const Tensor p({4, 4}, 0.5f);
  const Tensor empty({4, 4});
  const WeightedFResult r = weighted_f(p, empty, 0.3);
  CHECK(r.empty_gt);
  CHECK(r.value == 0.0);
}

TEST_CASE("large beta squared rewards recall") {
  // All-ones prediction: perfect recall, poor precision.
  const MetricFixture blob = fixture_blob();
  const Tensor ones({32, 32}, 1.0f);
  const double f_small = weighted_f(ones, blob.gt, 0.3).value;
  const double f_large = weighted_f(ones, blob.gt, 1e6).value;
  CHECK(f_large > f_small);
  CHECK(f_large == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("pr curve reference cases") {
  Prng rng(85);
  const Tensor g = random_mask(rng, 8, 8);
  const PrCurve perfect = pr_curve(g, g);
  CHECK(perfect.recall[0] == 1.0);  // t = 0 predicts everything
  for (int k = 1; k < PrCurve::kThresholds; ++k) {
    CHECK(perfect.precision[static_cast<std::size_t>(k)] == 1.0);
    CHECK(perfect.recall[static_cast<std::size_t>(k)] == 1.0);
  }
}

TEST_CASE("pr curve equals per-threshold counting on a random fixture") {
  Prng rng(86);
  const Tensor p = random_pred(rng, 4, 4);
  const Tensor g = random_mask(rng, 4, 4);
  const PrCurve got = pr_curve(p, g);
  std::int64_t n_fg = 0;
  for (float v : g.data) n_fg += v != 0.0f ? 1 : 0;
  for (int k = 0; k < PrCurve::kThresholds; ++k) {
    const double t = static_cast<double>(static_cast<float>(static_cast<double>(k) / 255.0));
    std::int64_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < p.data.size(); ++i) {
      if (static_cast<double>(p.data[i]) >= t) {
        (g.data[i] != 0.0f ? tp : fp) += 1;
      }
    }
    const double precision =
        (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 1.0;
    const double recall = n_fg > 0 ? static_cast<double>(tp) / static_cast<double>(n_fg) : 1.0;
    CHECK(got.precision[static_cast<std::size_t>(k)] == precision);
    CHECK(got.recall[static_cast<std::size_t>(k)] == recall);
  }
}

TEST_CASE("pr recall never increases with the threshold") {
  Prng rng(87);
  const Tensor p = random_pred(rng, 16, 16);
  const Tensor g = random_mask(rng, 16, 16);
  const PrCurve curve = pr_curve(p, g);
  for (int k = 1; k < PrCurve::kThresholds; ++k) {
    CHECK(curve.recall[static_cast<std::size_t>(k)] <=
          curve.recall[static_cast<std::size_t>(k - 1)]);
  }
}

TEST_CASE("pr curve with empty ground truth reports recall 1") {
  Prng rng(88);
  const Tensor p = random_pred(rng, 4, 4);
  const Tensor g({4, 4});
  const PrCurve curve = pr_curve(p, g);
  for (double r : curve.recall) CHECK(r == 1.0);
}

TEST_CASE("aggregation") {
  ImageMetrics a{0.1, 0.8, 0.7, 0.6};
  ImageMetrics b{0.3, 0.4, 0.5, 0.2};

  const MetricReport single = aggregate({a});
  CHECK(single.mae == a.mae);
  CHECK(single.weighted_f == a.weighted_f);
  CHECK(single.n_images == 1);

  const MetricReport twin = aggregate({a, a});
  CHECK(twin.mae == doctest::Approx(a.mae).epsilon(1e-12));
  CHECK(twin.n_images == 2);

  const MetricReport fwd = aggregate({a, b});
  const MetricReport rev = aggregate({b, a});
  CHECK(std::abs(fwd.mae - rev.mae) < 1e-9);
  CHECK(std::abs(fwd.msiou - rev.msiou) < 1e-9);
  CHECK(std::abs(fwd.s_measure - rev.s_measure) < 1e-9);
  CHECK(std::abs(fwd.weighted_f - rev.weighted_f) < 1e-9);

  CHECK_THROWS_AS(aggregate({}), ParamError);
}

TEST_CASE("all metric outputs live in [0, 1]") {
  Prng rng(89);
  MetricConfig cfg;
  for (int inst = 0; inst < 5; ++inst) {
    const Tensor p = random_pred(rng, 16, 16);
    const Tensor g = random_mask(rng, 16, 16);
    const ImageMetrics m = compute_image_metrics(p, g, cfg);
    for (double v : {m.mae, m.msiou, m.s_measure, m.weighted_f}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("metric config validation") {
  MetricConfig cfg;
  cfg.beta2 = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ParamError);
  cfg = MetricConfig{};
  cfg.alpha_s = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ParamError);
  cfg = MetricConfig{};
  cfg.iou_threshold = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ParamError);
}

TEST_SUITE_END();
