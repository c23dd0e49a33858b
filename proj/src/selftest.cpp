#include "sodkit/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sodkit/interaction.hpp"
#include "sodkit/graph.hpp"
#include "sodkit/losses.hpp"
#include "sodkit/modality_fusion.hpp"
#include "sodkit/metrics.hpp"

namespace sodkit {

namespace {

Tensor random_tensor(Prng& rng, std::vector<std::int64_t> dims, double lo, double hi) {
  Tensor t(std::move(dims));
  for (auto& v : t.data) v = static_cast<float>(lo + (hi - lo) * rng.next_unit());
  return t;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// 1. Top-K adjacency against a full-sort oracle.

CheckResult check_topk_oracle() {
  Prng rng(101);
  for (int inst = 0; inst < 100; ++inst) {
    const std::int64_t n = 10 + static_cast<std::int64_t>(rng.next() % 247);  // 10..256
    DistanceMatrix dist;
    dist.values = Tensor({n, n});
    for (std::int64_t i = 0; i < n; ++i) {
      for (std::int64_t j = 0; j < n; ++j) {
        // Quantized values so ties actually occur.
        dist.values.at(i, j) = i == j ? 0.0f : static_cast<float>(rng.next() % 16) / 16.0f;
      }
    }
    for (const std::int64_t k : {std::int64_t{1}, std::int64_t{4}, std::int64_t{8}, n - 1}) {
      const Tensor got = topk_adjacency(dist, k);
      // Oracle: sort every full row by (distance, column).
      for (std::int64_t i = 0; i < n; ++i) {
        std::vector<std::int64_t> cols;
        for (std::int64_t j = 0; j < n; ++j) {
          if (j != i) cols.push_back(j);
        }
        const float* row = dist.values.ptr() + i * n;
        std::sort(cols.begin(), cols.end(), [row](std::int64_t a, std::int64_t b) {
          if (row[a] != row[b]) return row[a] < row[b];
          return a < b;
        });
        std::vector<float> expect(static_cast<std::size_t>(n), 0.0f);
        for (std::int64_t s = 0; s < k; ++s) expect[static_cast<std::size_t>(cols[static_cast<std::size_t>(s)])] = 1.0f;
        for (std::int64_t j = 0; j < n; ++j) {
          if (got.at(i, j) != expect[static_cast<std::size_t>(j)]) {
            return {"graph/topk-vs-sort-oracle", false,
                    "mismatch at instance " + std::to_string(inst) + " N=" + std::to_string(n) +
                        " K=" + std::to_string(k) + " row " + std::to_string(i)};
          }
        }
      }
    }
  }
  return {"graph/topk-vs-sort-oracle", true, "100 instances, K in {1,4,8,N-1}"};
}

// ---------------------------------------------------------------------------
// 2. Complete graph with self-loops normalizes to a uniform operator.

CheckResult check_normalization_identity() {
  for (const std::int64_t n : {std::int64_t{2}, std::int64_t{4}, std::int64_t{16}}) {
    Tensor adj({n, n}, 1.0f);
    for (std::int64_t i = 0; i < n; ++i) adj.at(i, i) = 0.0f;
    const NormalizedGraph g = normalize_adjacency(adj, n - 1);
    const double expect = 1.0 / static_cast<double>(n);
    for (std::int64_t i = 0; i < n * n; ++i) {
      if (std::abs(static_cast<double>(g.op.ptr()[i]) - expect) > 1e-6) {
        return {"graph/complete-graph-operator", false,
                "operator entry off by " +
                    fmt(std::abs(static_cast<double>(g.op.ptr()[i]) - expect)) +
                    " at N=" + std::to_string(n)};
      }
    }
  }
  return {"graph/complete-graph-operator", true, "entries equal 1/N for N in {2,4,16}"};
}

// ---------------------------------------------------------------------------
// 3. Zero propagation weights leave the sequence bit-exactly unchanged.

CheckResult check_residual_identity() {
  Prng rng(202);
  for (int inst = 0; inst < 20; ++inst) {
    const std::int64_t h = 2 + static_cast<std::int64_t>(rng.next() % 4);
    const std::int64_t w = 2 + static_cast<std::int64_t>(rng.next() % 4);
    const std::int64_t n = h * w;
    const std::int64_t d = 1 + static_cast<std::int64_t>(rng.next() % 8);
    const Tensor x = random_tensor(rng, {1, n, d}, -2.0, 2.0);
    Tensor feats({n, d});
    feats.data = x.data;
    const NormalizedGraph g =
        build_graph(feats, {h, w}, {0.5, std::min<std::int64_t>(4, n - 1), false});
    const std::array<Tensor, 3> zero{Tensor({d, d}), Tensor({d, d}), Tensor({d, d})};
    const Tensor x3 = propagate_uncertainty(x, g, zero);
    if (x3.data != x.data) {
      return {"interaction/zero-weight-propagation-identity", false,
              "instance " + std::to_string(inst) + " changed the input"};
    }
  }
  return {"interaction/zero-weight-propagation-identity", true, "bit-exact on 20 instances"};
}

// ---------------------------------------------------------------------------
// 4. Gate bound: |F| <= |F'| <= 2 |F| elementwise.

CheckResult check_gate_bound() {
  Prng rng(303);
  for (int inst = 0; inst < 20; ++inst) {
    const std::int64_t h = 2 + static_cast<std::int64_t>(rng.next() % 5);
    const std::int64_t w = 2 + static_cast<std::int64_t>(rng.next() % 5);
    const std::int64_t d = 4 + static_cast<std::int64_t>(rng.next() % 8);
    const Tensor fmap = random_tensor(rng, {1, d, h, w}, -3.0, 3.0);
    const Tensor x3 = random_tensor(rng, {1, h * w, d}, -3.0, 3.0);
    MlpParams mlp;
    const std::int64_t hidden = std::max<std::int64_t>(1, d / 4);
    mlp.w1 = random_tensor(rng, {hidden, d}, -0.5, 0.5);
    mlp.b1 = random_tensor(rng, {hidden}, -0.5, 0.5);
    mlp.w2 = random_tensor(rng, {1, hidden}, -0.5, 0.5);
    mlp.b2 = random_tensor(rng, {1}, -0.5, 0.5);
    const Tensor gated = uncertainty_gate(fmap, x3, mlp);
    for (std::size_t i = 0; i < fmap.data.size(); ++i) {
      const double f = std::abs(static_cast<double>(fmap.data[i]));
      const double fp = std::abs(static_cast<double>(gated.data[i]));
      if (fp + 1e-12 < f || fp > 2.0 * f + 1e-12) {
        return {"interaction/uncertainty-gate-bound", false,
                "|gated| outside [|f|, 2|f|]: f=" + fmt(f) + " gated=" + fmt(fp)};
      }
    }
  }
  return {"interaction/uncertainty-gate-bound", true, "bound holds on 20 instances"};
}

// ---------------------------------------------------------------------------
// 5. Attention: row-stochastic scores and agreement with a naive oracle.

// Double-precision scratch implementation of single-head attention, written
// directly from the formula, independent of the library's streaming path.
std::vector<double> naive_attention(const std::vector<double>& q_in,
                                    const std::vector<double>& kv_in, const Tensor& wq,
                                    const Tensor& wk, const Tensor& wv, std::int64_t n,
                                    std::int64_t m, std::int64_t d) {
  auto matmul = [&](const std::vector<double>& a, const Tensor& w, std::int64_t rows) {
    std::vector<double> out(static_cast<std::size_t>(rows * d), 0.0);
    for (std::int64_t i = 0; i < rows; ++i) {
      for (std::int64_t j = 0; j < d; ++j) {
        double acc = 0.0;
        for (std::int64_t k = 0; k < d; ++k) {
          acc += a[static_cast<std::size_t>(i * d + k)] * static_cast<double>(w.at(k, j));
        }
        out[static_cast<std::size_t>(i * d + j)] = acc;
      }
    }
    return out;
  };
  const auto q = matmul(q_in, wq, n);
  const auto k = matmul(kv_in, wk, m);
  const auto v = matmul(kv_in, wv, m);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));

  std::vector<double> out(static_cast<std::size_t>(n * d), 0.0);
  for (std::int64_t i = 0; i < n; ++i) {
    std::vector<double> scores(static_cast<std::size_t>(m), 0.0);
    double maxv = -1e300;
    for (std::int64_t j = 0; j < m; ++j) {
      double acc = 0.0;
      for (std::int64_t c = 0; c < d; ++c) {
        acc += q[static_cast<std::size_t>(i * d + c)] * k[static_cast<std::size_t>(j * d + c)];
      }
      scores[static_cast<std::size_t>(j)] = acc * scale;
      maxv = std::max(maxv, scores[static_cast<std::size_t>(j)]);
    }
    double sum = 0.0;
    for (double& s : scores) {
      s = std::exp(s - maxv);
      sum += s;
    }
    for (double& s : scores) s /= sum;
    for (std::int64_t j = 0; j < m; ++j) {
      for (std::int64_t c = 0; c < d; ++c) {
        out[static_cast<std::size_t>(i * d + c)] +=
            scores[static_cast<std::size_t>(j)] * v[static_cast<std::size_t>(j * d + c)];
      }
    }
  }
  return out;
}

std::vector<double> widen(const Tensor& t) {
  std::vector<double> out(t.data.size());
  for (std::size_t i = 0; i < t.data.size(); ++i) out[i] = t.data[i];
  return out;
}

CheckResult check_attention() {
  Prng rng(404);

  // Row sums of the softmaxed score matrix.
  {
    const Tensor q = random_tensor(rng, {1, 16, 8}, -2.0, 2.0);
    const Tensor kv = random_tensor(rng, {1, 12, 8}, -2.0, 2.0);
    AttnParams attn;
    attn.wq = random_tensor(rng, {8, 8}, -0.5, 0.5);
    attn.wk = random_tensor(rng, {8, 8}, -0.5, 0.5);
    attn.wv = random_tensor(rng, {8, 8}, -0.5, 0.5);
    const Tensor scores = attention_scores(q, kv, attn);
    for (std::int64_t i = 0; i < 16; ++i) {
      double sum = 0.0;
      for (std::int64_t j = 0; j < 12; ++j) sum += scores.at(0, i, j);
      if (std::abs(sum - 1.0) > 1e-5) {
        return {"attention/rows-and-naive-oracle", false, "row sum " + fmt(sum)};
      }
    }
  }

  // Cross-attention path (with output map and residual) on a 2x2 grid, d=2,
  // against the naive oracle. The far level shares the spatial size and the
  // projection is the identity so the oracle sees the raw values.
  const std::int64_t d = 2, hh = 2, ww = 2, n = 4;
  for (int inst = 0; inst < 10; ++inst) {
    const Tensor f_prime = random_tensor(rng, {1, d, hh, ww}, -1.5, 1.5);
    const Tensor f_far = random_tensor(rng, {1, d, hh, ww}, -1.5, 1.5);
    CrossPathParams path;
    path.proj.weight = Tensor({d, d, 1, 1});
    path.proj.weight.at(0, 0, 0, 0) = 1.0f;
    path.proj.weight.at(1, 1, 0, 0) = 1.0f;
    path.proj.bias = Tensor({d});
    path.attn.wq = random_tensor(rng, {d, d}, -1.0, 1.0);
    path.attn.wk = random_tensor(rng, {d, d}, -1.0, 1.0);
    path.attn.wv = random_tensor(rng, {d, d}, -1.0, 1.0);
    path.out_map = random_tensor(rng, {d, d}, -1.0, 1.0);

    const Tensor got = cross_attention_fuse(f_prime, f_far, path);

    const auto q_seq = widen(flatten_spatial(f_prime));
    const auto kv_seq = widen(flatten_spatial(f_far));
    const auto attended =
        naive_attention(q_seq, kv_seq, path.attn.wq, path.attn.wk, path.attn.wv, n, n, d);
    for (std::int64_t i = 0; i < n; ++i) {
      for (std::int64_t c = 0; c < d; ++c) {
        double mapped = 0.0;
        for (std::int64_t k = 0; k < d; ++k) {
          mapped += attended[static_cast<std::size_t>(i * d + k)] *
                    static_cast<double>(path.out_map.at(k, c));
        }
        const double expect = q_seq[static_cast<std::size_t>(i * d + c)] + mapped;
        const double actual = got.at(0, c, i / ww, i % ww);
        if (std::abs(actual - expect) > 1e-5) {
          return {"attention/rows-and-naive-oracle", false,
                  "cross-attention differs from the oracle by " + fmt(std::abs(actual - expect))};
        }
      }
    }
  }

  // Self-attention encoding (no residual) against the same oracle.
  for (int inst = 0; inst < 10; ++inst) {
    const Tensor f = random_tensor(rng, {1, d, hh, ww}, -1.5, 1.5);
    ConvParams proj;
    proj.weight = Tensor({d, d, 1, 1});
    proj.weight.at(0, 0, 0, 0) = 1.0f;
    proj.weight.at(1, 1, 0, 0) = 1.0f;
    proj.bias = Tensor({d});
    AttnParams attn;
    attn.wq = random_tensor(rng, {d, d}, -1.0, 1.0);
    attn.wk = random_tensor(rng, {d, d}, -1.0, 1.0);
    attn.wv = random_tensor(rng, {d, d}, -1.0, 1.0);

    const Tensor got = encode_modality(f, proj, attn);
    const auto seq = widen(flatten_spatial(f));
    const auto expect = naive_attention(seq, seq, attn.wq, attn.wk, attn.wv, n, n, d);
    for (std::int64_t i = 0; i < n; ++i) {
      for (std::int64_t c = 0; c < d; ++c) {
        const double actual = got.at(0, c, i / ww, i % ww);
        if (std::abs(actual - expect[static_cast<std::size_t>(i * d + c)]) > 1e-5) {
          return {"attention/rows-and-naive-oracle", false,
                  "self-attention differs from the oracle"};
        }
      }
    }
  }
  return {"attention/rows-and-naive-oracle", true,
          "rows sum to 1; cross/self attention match the naive oracle"};
}

// ---------------------------------------------------------------------------
// 6. Modality gating.

CheckResult check_modality_gating() {
  const auto w0 = modality_weights({0.0f, 0.0f, 0.0f});
  for (double w : w0) {
    if (std::abs(w - 1.0 / 3.0) > 1e-7) {
      return {"fusion/modality-gating", false, "uniform logits gave weight " + fmt(w)};
    }
  }
  const auto base = modality_weights({0.3f, -1.2f, 0.7f});
  const auto shifted = modality_weights({0.3f + 5.0f, -1.2f + 5.0f, 0.7f + 5.0f});
  for (int i = 0; i < 3; ++i) {
    if (std::abs(base[static_cast<std::size_t>(i)] - shifted[static_cast<std::size_t>(i)]) > 1e-7) {
      return {"fusion/modality-gating", false, "softmax is not shift invariant"};
    }
  }

  Prng rng(505);
  for (int inst = 0; inst < 20; ++inst) {
    std::array<Tensor, 3> enc;
    for (auto& t : enc) t = random_tensor(rng, {1, 3, 4, 4}, -2.0, 2.0);
    const std::array<float, 3> theta{static_cast<float>(rng.next_unit() * 4.0 - 2.0),
                                     static_cast<float>(rng.next_unit() * 4.0 - 2.0),
                                     static_cast<float>(rng.next_unit() * 4.0 - 2.0)};
    const auto w = modality_weights(theta);
    const Tensor fused = fuse_modalities(enc, w);
    for (std::size_t i = 0; i < fused.data.size(); ++i) {
      const float lo = std::min({enc[0].data[i], enc[1].data[i], enc[2].data[i]});
      const float hi = std::max({enc[0].data[i], enc[1].data[i], enc[2].data[i]});
      if (fused.data[i] < lo - 1e-6f || fused.data[i] > hi + 1e-6f) {
        return {"fusion/modality-gating", false, "fused value escapes the convex hull"};
      }
    }
  }
  return {"fusion/modality-gating", true, "uniform weights, shift invariance, convexity"};
}

// ---------------------------------------------------------------------------
// 7. Loss values.

CheckResult check_loss_values() {
  Prng rng(606);
  {
    const Tensor s({1, 1, 4, 4}, 0.5f);
    const Tensor y = random_tensor(rng, {1, 1, 4, 4}, 0.0, 1.0);
    const double v = bce_loss(s, y).value;
    if (std::abs(v - std::log(2.0)) > 1e-6) {
      return {"losses/reference-values", false, "bce(0.5, y) = " + fmt(v) + ", want ln 2"};
    }
  }
  {
    const Tensor s({1, 1, 2, 2}, 1.0f);
    Tensor y({1, 1, 2, 2});
    y.data = {1.0f, 1.0f, 0.0f, 0.0f};
    const double v = iou_loss(s, y).value;
    if (std::abs(v - 0.5) > 1e-6) {
      return {"losses/reference-values", false, "iou hand case = " + fmt(v) + ", want 0.5"};
    }
  }
  {
    SaliencyOutputs s;
    s.s16 = random_tensor(rng, {1, 1, 2, 2}, 0.2, 0.8);
    s.s8 = random_tensor(rng, {1, 1, 4, 4}, 0.2, 0.8);
    s.s4 = random_tensor(rng, {1, 1, 8, 8}, 0.2, 0.8);
    MaskOutputs m;
    m.m4 = random_tensor(rng, {1, 1, 8, 8}, 0.2, 0.8);
    m.m2 = random_tensor(rng, {1, 1, 16, 16}, 0.2, 0.8);
    m.m1 = random_tensor(rng, {1, 1, 32, 32}, 0.2, 0.8);
    Tensor y({1, 1, 32, 32});
    for (auto& v : y.data) v = rng.next() % 2 ? 1.0f : 0.0f;
    const LossBreakdown breakdown = total_loss(s, m, y, 0.1, true);
    if (breakdown.total != breakdown.sal + breakdown.consistency) {
      return {"losses/reference-values", false, "total != sal + consistency"};
    }
    if (breakdown.bce_per_output.size() != 6 || breakdown.iou_per_output.size() != 6) {
      return {"losses/reference-values", false, "expected six per-output terms"};
    }
  }
  return {"losses/reference-values", true, "bce = ln 2, iou hand case, exact additivity"};
}

// ---------------------------------------------------------------------------
// 8. Gradient checks.

CheckResult check_gradients(bool inject_bug) {
  Prng rng(707);
  for (int inst = 0; inst < 20; ++inst) {
    const Tensor s = random_tensor(rng, {1, 1, 8, 8}, 0.05, 0.95);
    Tensor y({1, 1, 8, 8});
    for (auto& v : y.data) v = rng.next() % 2 ? 1.0f : 0.0f;

    if (inject_bug) {
      // Recreate the finite-difference comparison with a corrupted analytic
      // gradient; it must be caught.
      Tensor grad = bce_loss(s, y).grad;
      grad.data[0] += 0.1f;
      Tensor probe = s;
      const double h = 1e-3;
      const float orig = probe.data[0];
      probe.data[0] = static_cast<float>(orig + h);
      const double fp = bce_loss(probe, y).value;
      probe.data[0] = static_cast<float>(orig - h);
      const double fm = bce_loss(probe, y).value;
      const double numeric = (fp - fm) / (2.0 * h);
      const double rel = std::abs(grad.data[0] - numeric) /
                         std::max({std::abs(static_cast<double>(grad.data[0])), std::abs(numeric), 1e-8});
      if (rel < 1e-3) {
        return {"losses/finite-difference-gradients", false,
                "injected gradient corruption went undetected"};
      }
      return {"losses/finite-difference-gradients", false,
              "gradient bug injected (rel err " + fmt(rel) + ")"};
    }

    const GradCheckReport bce = finite_diff_check(LossKind::Bce, s, y, 1e-3);
    if (!bce.pass) {
      return {"losses/finite-difference-gradients", false,
              "bce rel err " + fmt(bce.max_rel_error)};
    }
    const GradCheckReport iou = finite_diff_check(LossKind::Iou, s, y, 1e-3);
    if (!iou.pass) {
      return {"losses/finite-difference-gradients", false,
              "iou rel err " + fmt(iou.max_rel_error)};
    }
  }

  // Detach semantics: the finer member of each pair receives no gradient.
  SaliencyOutputs s;
  s.s16 = random_tensor(rng, {1, 1, 4, 4}, 0.1, 0.9);
  s.s8 = random_tensor(rng, {1, 1, 8, 8}, 0.1, 0.9);
  s.s4 = random_tensor(rng, {1, 1, 16, 16}, 0.1, 0.9);
  const ConsistencyPair p1 = consistency_pair(s.s16, s.s8, 0.1, true);
  const ConsistencyPair p2 = consistency_pair(s.s8, s.s4, 0.1, true);
  const ConsistencyResult full = consistency_loss(s, 0.1, true);
  auto all_zero = [](const Tensor& t) {
    return std::all_of(t.data.begin(), t.data.end(), [](float v) { return v == 0.0f; });
  };
  if (!all_zero(p1.grad_fine) || !all_zero(p2.grad_fine) || !all_zero(full.grad_s4)) {
    return {"losses/finite-difference-gradients", false, "detached member received gradient"};
  }
  return {"losses/finite-difference-gradients", true,
          "bce/iou pass at 1e-3 over 20 instances; detached gradients are zero"};
}

// ---------------------------------------------------------------------------
// 9. Metric oracles.

// Plain per-threshold counting, O(256 * N); independent of the bucketed path.
bool pr_counting_oracle(const Tensor& p, const Tensor& g) {
  const PrCurve got = pr_curve(p, g);
  std::int64_t n_fg = 0;
  for (float v : g.data) n_fg += v != 0.0f ? 1 : 0;
  for (int k = 0; k < PrCurve::kThresholds; ++k) {
    const double t = static_cast<double>(static_cast<float>(static_cast<double>(k) / 255.0));
    std::int64_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < p.data.size(); ++i) {
      if (static_cast<double>(p.data[i]) >= t) {
        if (g.data[i] != 0.0f) {
          ++tp;
        } else {
          ++fp;
        }
      }
    }
    const double precision =
        (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 1.0;
    const double recall = n_fg > 0 ? static_cast<double>(tp) / static_cast<double>(n_fg) : 1.0;
    if (got.precision[static_cast<std::size_t>(k)] != precision ||
        got.recall[static_cast<std::size_t>(k)] != recall) {
      return false;
    }
  }
  return true;
}

CheckResult check_metric_oracles() {
  const MetricFixture speckle = fixture_speckle();
  const MetricFixture blob = fixture_blob();
  const MetricFixture inverse = fixture_inverse();
  const MetricGoldens& gold = metric_goldens();

  for (const MetricFixture* fx : {&speckle, &blob, &inverse}) {
    // MAE against an index-ordered recount.
    double acc = 0.0;
    for (std::size_t i = 0; i < fx->pred.data.size(); ++i) {
      acc += std::abs(static_cast<double>(fx->pred.data[i]) - static_cast<double>(fx->gt.data[i]));
    }
    if (mae(fx->pred, fx->gt) != acc / static_cast<double>(fx->pred.numel())) {
      return {"metrics/oracles-and-goldens", false, "mae differs from the counting oracle"};
    }
    // mSIOU against direct set counting.
    std::int64_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < fx->pred.data.size(); ++i) {
      const bool pb = static_cast<double>(fx->pred.data[i]) >= 0.5;
      const bool gb = fx->gt.data[i] != 0.0f;
      inter += (pb && gb) ? 1 : 0;
      uni += (pb || gb) ? 1 : 0;
    }
    const double expect = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
    if (msiou(fx->pred, fx->gt, 0.5) != expect) {
      return {"metrics/oracles-and-goldens", false, "msiou differs from the counting oracle"};
    }
    if (!pr_counting_oracle(fx->pred, fx->gt)) {
      return {"metrics/oracles-and-goldens", false, "pr curve differs from the counting oracle"};
    }
  }

  const struct {
    const char* name;
    double got;
    double want;
  } goldens[] = {
      {"s_measure(speckle)", s_measure(speckle.pred, speckle.gt, 0.5), gold.s_measure_speckle},
      {"s_measure(blob)", s_measure(blob.pred, blob.gt, 0.5), gold.s_measure_blob},
      {"s_measure(perfect)", s_measure(blob.gt, blob.gt, 0.5), gold.s_measure_perfect},
      {"weighted_f(speckle)", weighted_f(speckle.pred, speckle.gt, 0.3).value,
       gold.weighted_f_speckle},
      {"weighted_f(blob)", weighted_f(blob.pred, blob.gt, 0.3).value, gold.weighted_f_blob},
      {"weighted_f(inverse)", weighted_f(inverse.pred, inverse.gt, 0.3).value,
       gold.weighted_f_inverse},
  };
  for (const auto& g : goldens) {
    if (std::abs(g.got - g.want) > 1e-6) {
      return {"metrics/oracles-and-goldens", false,
              std::string(g.name) + " = " + fmt(g.got) + ", golden " + fmt(g.want)};
    }
  }

  // Perfect prediction.
  if (mae(blob.gt, blob.gt) != 0.0 || msiou(blob.gt, blob.gt, 0.5) != 1.0 ||
      std::abs(weighted_f(blob.gt, blob.gt, 0.3).value - 1.0) > 1e-6) {
    return {"metrics/oracles-and-goldens", false, "perfect prediction is not scored perfectly"};
  }
  return {"metrics/oracles-and-goldens", true,
          "counting oracles exact; reference goldens within 1e-6"};
}

}  // namespace

MetricFixture fixture_speckle() {
  MetricFixture fx;
  fx.pred = Tensor({32, 32});
  fx.gt = Tensor({32, 32});
  Prng rng_p(0x5EEDF00DULL);
  for (auto& v : fx.pred.data) {
    v = static_cast<float>(static_cast<double>(rng_p.next() % 256) / 255.0);
  }
  Prng rng_g(0xBADC0FFEULL);
  for (auto& v : fx.gt.data) v = rng_g.next() % 2 ? 1.0f : 0.0f;
  return fx;
}

MetricFixture fixture_blob() {
  MetricFixture fx;
  fx.pred = Tensor({32, 32});
  fx.gt = Tensor({32, 32});
  for (std::int64_t r = 0; r < 32; ++r) {
    for (std::int64_t c = 0; c < 32; ++c) {
      const bool in_rect = r >= 8 && r < 20 && c >= 6 && c < 16;
      const bool in_disk = (r - 22) * (r - 22) + (c - 22) * (c - 22) <= 36;
      fx.gt.at(r, c) = (in_rect || in_disk) ? 1.0f : 0.0f;
    }
  }
  Prng rng(0xFEEDBEEFULL);
  for (std::int64_t r = 0; r < 32; ++r) {
    for (std::int64_t c = 0; c < 32; ++c) {
      const std::uint64_t base = fx.gt.at(r, c) != 0.0f ? 180 : 30;
      fx.pred.at(r, c) = static_cast<float>(static_cast<double>(base + rng.next() % 56) / 255.0);
    }
  }
  return fx;
}

MetricFixture fixture_inverse() {
  MetricFixture fx = fixture_blob();
  for (std::size_t i = 0; i < fx.pred.data.size(); ++i) {
    fx.pred.data[i] = 1.0f - fx.gt.data[i];
  }
  return fx;
}

const MetricGoldens& metric_goldens() {
  // Generated by tests/ref/ref_metrics.py.
  static const MetricGoldens goldens{
      0.322764361912806,  // s_measure_speckle
      0.764675069664528,  // s_measure_blob
      0.999999999999910,  // s_measure_perfect
      0.564784322795385,  // weighted_f_speckle
      0.478739956689458,  // weighted_f_blob
      0.000000000000000,  // weighted_f_inverse
  };
  return goldens;
}

std::vector<CheckResult> run_selftest(const SelftestOptions& opt) {
  std::vector<CheckResult> results;
  results.push_back(check_topk_oracle());
  results.push_back(check_normalization_identity());
  results.push_back(check_residual_identity());
  results.push_back(check_gate_bound());
  results.push_back(check_attention());
  results.push_back(check_modality_gating());
  results.push_back(check_loss_values());
  results.push_back(check_gradients(opt.inject_gradient_bug));
  results.push_back(check_metric_oracles());
  return results;
}

}  // namespace sodkit
