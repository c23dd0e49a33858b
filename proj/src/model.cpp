#include "sodkit/model.hpp"

#include <algorithm>
#include <cmath>

namespace sodkit {

namespace {

constexpr std::int64_t kSeReduction = 4;

ConvParams make_conv(Prng& rng, std::int64_t c_out, std::int64_t c_in, std::int64_t k) {
  ConvParams p;
  const std::int64_t fan_in = c_in * k * k;
  p.weight = init_uniform(rng, {c_out, c_in, k, k}, fan_in);
  p.bias = init_uniform(rng, {c_out}, fan_in);
  return p;
}

Tensor make_linear_w(Prng& rng, std::int64_t m, std::int64_t n) {
  return init_uniform(rng, {m, n}, n);
}

Tensor make_linear_b(Prng& rng, std::int64_t m, std::int64_t n) {
  return init_uniform(rng, {m}, n);
}

SeParams make_se(Prng& rng, std::int64_t channels) {
  const std::int64_t hidden = std::max<std::int64_t>(1, channels / kSeReduction);
  SeParams se;
  se.w1 = make_linear_w(rng, hidden, channels);
  se.b1 = make_linear_b(rng, hidden, channels);
  se.w2 = make_linear_w(rng, channels, hidden);
  se.b2 = make_linear_b(rng, channels, hidden);
  return se;
}

MlpParams make_mlp(Prng& rng, std::int64_t d) {
  const std::int64_t hidden = std::max<std::int64_t>(1, d / 4);
  MlpParams mlp;
  mlp.w1 = make_linear_w(rng, hidden, d);
  mlp.b1 = make_linear_b(rng, hidden, d);
  mlp.w2 = make_linear_w(rng, 1, hidden);
  mlp.b2 = make_linear_b(rng, 1, hidden);
  return mlp;
}

AttnParams make_attn(Prng& rng, std::int64_t d) {
  AttnParams a;
  a.wq = make_linear_w(rng, d, d);
  a.wk = make_linear_w(rng, d, d);
  a.wv = make_linear_w(rng, d, d);
  return a;
}

Tensor constant_map(std::int64_t b, std::int64_t h, std::int64_t w, float value) {
  return Tensor({b, 1, h, w}, value);
}

Tensor replicate_to_rgb(const Tensor& mono) { return concat_channels({&mono, &mono, &mono}); }

}  // namespace

void ModelConfig::validate() const {
  if (input_h < 32 || input_w < 32 || input_h % 32 != 0 || input_w % 32 != 0) {
    throw ParamError("input extents must be positive multiples of 32");
  }
  for (std::int64_t c : backbone_channels) {
    if (c < 1) throw ParamError("backbone channel counts must be >= 1");
  }
  if (embed_dim < 1) throw ParamError("embed_dim must be >= 1");
  if (!(alpha_graph >= 0.0 && alpha_graph <= 1.0)) throw ParamError("alpha_graph must lie in [0, 1]");
  if (k_neighbors < 1) throw ParamError("k_neighbors must be >= 1");
  for (std::int64_t p : graph_pool) {
    if (p < 1) throw ParamError("graph_pool factors must be >= 1");
  }
  if (lambda_c < 0.0) throw ParamError("lambda_c must be >= 0");
}

ModelParams ModelParams::init(const ModelConfig& cfg) {
  cfg.validate();
  Prng rng(cfg.seed);
  const auto& ch = cfg.backbone_channels;
  const std::int64_t d = cfg.embed_dim;

  ModelParams p;
  p.backbone.stages[0] = make_conv(rng, ch[0], 3, 3);
  p.backbone.stages[1] = make_conv(rng, ch[0], ch[0], 3);
  p.backbone.stages[2] = make_conv(rng, ch[1], ch[0], 3);
  p.backbone.stages[3] = make_conv(rng, ch[2], ch[1], 3);
  p.backbone.stages[4] = make_conv(rng, ch[3], ch[2], 3);

  for (std::int64_t l = 0; l < 4; ++l) {
    InteractionLevelParams& lp = p.interaction[static_cast<std::size_t>(l)];
    const std::int64_t c = ch[static_cast<std::size_t>(l)];
    lp.se = make_se(rng, c);
    lp.proj = make_conv(rng, d, c, 1);
    for (Tensor& w : lp.gcn) w = make_linear_w(rng, d, d);
    lp.unc_mlp = make_mlp(rng, d);

    const std::int64_t n_adjacent = std::min<std::int64_t>(2, 3 - l);
    for (std::int64_t k = 1; k <= n_adjacent; ++k) {
      FusePathParams path;
      path.proj = make_conv(rng, d, ch[static_cast<std::size_t>(l + k)], 1);
      path.conv1 = make_conv(rng, d, 2 * d, 3);
      path.conv2 = make_conv(rng, d, d, 3);
      lp.adjacent.push_back(std::move(path));
    }
    if (l + 3 <= 3) {
      CrossPathParams cross;
      cross.proj = make_conv(rng, d, ch[3], 1);
      cross.attn = make_attn(rng, d);
      cross.out_map = make_linear_w(rng, d, d);
      lp.cross = std::move(cross);
    }
    const std::int64_t paths = static_cast<std::int64_t>(lp.adjacent.size()) +
                               (lp.cross.has_value() ? 1 : 0);
    lp.bottleneck1 = make_conv(rng, d, std::max<std::int64_t>(1, paths) * d, 3);
    lp.bottleneck2 = make_conv(rng, c, d, 1);
  }

  for (std::int64_t l = 0; l < 4; ++l) {
    ModalityFusionParams& mp = p.fusion[static_cast<std::size_t>(l)];
    const std::int64_t c = ch[static_cast<std::size_t>(l)];
    for (std::size_t m = 0; m < 3; ++m) {
      mp.proj[m] = make_conv(rng, d, c, 1);
      mp.attn[m] = make_attn(rng, d);
    }
    mp.theta = {0.0f, 0.0f, 0.0f};
  }

  const std::int64_t dm2 = std::max<std::int64_t>(1, d / 2);
  const std::int64_t dm4 = std::max<std::int64_t>(1, d / 4);
  p.decoder.merge_8 = make_conv(rng, d, d, 3);
  p.decoder.merge_4 = make_conv(rng, d, d, 3);
  p.decoder.head_16 = make_conv(rng, 1, d, 1);
  p.decoder.head_8 = make_conv(rng, 1, d, 1);
  p.decoder.head_4 = make_conv(rng, 1, d, 1);
  p.decoder.mask_up_2 = make_conv(rng, dm2, d, 3);
  p.decoder.mask_up_1 = make_conv(rng, dm4, dm2, 3);
  p.decoder.mask_head_4 = make_conv(rng, 1, d, 1);
  p.decoder.mask_head_2 = make_conv(rng, 1, dm2, 1);
  p.decoder.mask_head_1 = make_conv(rng, 1, dm4, 1);
  return p;
}

Tensor derive_edge(const Tensor& rgb) {
  if (rgb.rank() != 4 || rgb.dim(1) != 3) throw ShapeError("derive_edge expects [B, 3, H, W]");
  const std::int64_t batches = rgb.dim(0);
  const std::int64_t h = rgb.dim(2);
  const std::int64_t w = rgb.dim(3);
  const std::int64_t plane = h * w;

  Tensor edge({batches, 1, h, w});
  std::vector<double> gray(static_cast<std::size_t>(plane));
  for (std::int64_t b = 0; b < batches; ++b) {
    const float* r = rgb.ptr() + (b * 3 + 0) * plane;
    const float* gch = rgb.ptr() + (b * 3 + 1) * plane;
    const float* bl = rgb.ptr() + (b * 3 + 2) * plane;
    for (std::int64_t i = 0; i < plane; ++i) {
      gray[static_cast<std::size_t>(i)] = 0.299 * r[i] + 0.587 * gch[i] + 0.114 * bl[i];
    }

    auto sample = [&](std::int64_t y, std::int64_t x) {
      y = std::clamp<std::int64_t>(y, 0, h - 1);
      x = std::clamp<std::int64_t>(x, 0, w - 1);
      return gray[static_cast<std::size_t>(y * w + x)];
    };

    std::vector<double> mag(static_cast<std::size_t>(plane));
    double max_mag = 0.0;
    for (std::int64_t y = 0; y < h; ++y) {
      for (std::int64_t x = 0; x < w; ++x) {
        const double gx = -sample(y - 1, x - 1) + sample(y - 1, x + 1) -
                          2.0 * sample(y, x - 1) + 2.0 * sample(y, x + 1) -
                          sample(y + 1, x - 1) + sample(y + 1, x + 1);
        const double gy = -sample(y - 1, x - 1) - 2.0 * sample(y - 1, x) - sample(y - 1, x + 1) +
                          sample(y + 1, x - 1) + 2.0 * sample(y + 1, x) + sample(y + 1, x + 1);
        const double m = std::sqrt(gx * gx + gy * gy);
        mag[static_cast<std::size_t>(y * w + x)] = m;
        max_mag = std::max(max_mag, m);
      }
    }
    float* out = edge.ptr() + b * plane;
    if (max_mag > 0.0) {
      for (std::int64_t i = 0; i < plane; ++i) {
        out[i] = static_cast<float>(mag[static_cast<std::size_t>(i)] / max_mag);
      }
    }
  }
  return edge;
}

LevelFeatures backbone_forward(const Tensor& x, const BackboneParams& params) {
  if (x.rank() != 4 || x.dim(1) != 3) throw ShapeError("backbone expects [B, 3, H, W]");
  if (x.dim(2) % 32 != 0 || x.dim(3) % 32 != 0) {
    throw ParamError("backbone input extents must be divisible by 32");
  }
  const Tensor s1 = activate(conv_strided(x, params.stages[0], 2), Activation::Relu);
  LevelFeatures out;
  out.levels[0] = activate(conv_strided(s1, params.stages[1], 2), Activation::Relu);
  out.levels[1] = activate(conv_strided(out.levels[0], params.stages[2], 2), Activation::Relu);
  out.levels[2] = activate(conv_strided(out.levels[1], params.stages[3], 2), Activation::Relu);
  out.levels[3] = activate(conv_strided(out.levels[2], params.stages[4], 2), Activation::Relu);
  return out;
}

std::pair<SaliencyOutputs, MaskOutputs> model_forward(const ModalityInputs& inputs,
                                                      const ModelParams& params,
                                                      const ModelConfig& cfg) {
  const Tensor& rgb = inputs.rgb;
  if (rgb.rank() != 4 || rgb.dim(1) != 3) throw ShapeError("rgb input must be [B, 3, H, W]");
  const std::int64_t batches = rgb.dim(0);
  const std::int64_t h = rgb.dim(2);
  const std::int64_t w = rgb.dim(3);
  if (h % 32 != 0 || w % 32 != 0) throw ParamError("input extents must be divisible by 32");

  Tensor depth = inputs.depth.has_value() ? *inputs.depth : constant_map(batches, h, w, 0.5f);
  Tensor edge = inputs.edge.has_value() ? *inputs.edge : derive_edge(rgb);
  for (const Tensor* mono : {&depth, &edge}) {
    if (mono->rank() != 4 || mono->dim(0) != batches || mono->dim(1) != 1 ||
        mono->dim(2) != h || mono->dim(3) != w) {
      throw ShapeError("depth/edge inputs must be [B, 1, H, W] matching the RGB input");
    }
  }

  InteractionOptions dopt;
  dopt.embed_dim = cfg.embed_dim;
  dopt.graph.alpha = cfg.alpha_graph;
  dopt.graph.neighbors = cfg.k_neighbors;
  dopt.graph.symmetrize = cfg.graph_symmetrize;
  dopt.pool = cfg.graph_pool;

  // Shared backbone and DUGC weights across the three modality streams.
  const std::array<Tensor, 3> streams{rgb, replicate_to_rgb(depth), replicate_to_rgb(edge)};
  std::array<std::array<Tensor, 4>, 3> refined;
  for (std::size_t m = 0; m < 3; ++m) {
    const LevelFeatures levels = backbone_forward(streams[m], params.backbone);
    refined[m] = interaction_forward(levels, params.interaction, dopt);
  }

  std::array<Tensor, 4> fused;
  for (std::size_t l = 0; l < 4; ++l) {
    fused[l] = modality_fusion_forward({refined[0][l], refined[1][l], refined[2][l]},
                           params.fusion[l]);
  }

  // Decoder: lift the coarsest fused map to stride 16, merge by addition,
  // then progressively upsample and merge the finer fused levels.
  const Tensor d16 = add(bilinear_resize(fused[3], fused[2].dim(2), fused[2].dim(3)), fused[2]);
  const Tensor d8 = add(activate(conv(bilinear_resize(d16, fused[1].dim(2), fused[1].dim(3)),
                                      params.decoder.merge_8),
                                 Activation::Relu),
                        fused[1]);
  const Tensor d4 = add(activate(conv(bilinear_resize(d8, fused[0].dim(2), fused[0].dim(3)),
                                      params.decoder.merge_4),
                                 Activation::Relu),
                        fused[0]);

  SaliencyOutputs sal;
  sal.s16 = activate(conv(d16, params.decoder.head_16), Activation::Sigmoid);
  sal.s8 = activate(conv(d8, params.decoder.head_8), Activation::Sigmoid);
  sal.s4 = activate(conv(d4, params.decoder.head_4), Activation::Sigmoid);

  const Tensor u2 = activate(conv(bilinear_resize(d4, h / 2, w / 2), params.decoder.mask_up_2),
                             Activation::Relu);
  const Tensor u1 = activate(conv(bilinear_resize(u2, h, w), params.decoder.mask_up_1),
                             Activation::Relu);

  MaskOutputs masks;
  masks.m4 = activate(conv(d4, params.decoder.mask_head_4), Activation::Sigmoid);
  masks.m2 = activate(conv(u2, params.decoder.mask_head_2), Activation::Sigmoid);
  masks.m1 = activate(conv(u1, params.decoder.mask_head_1), Activation::Sigmoid);
  return {std::move(sal), std::move(masks)};
}

}  // namespace sodkit
