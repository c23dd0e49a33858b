#include "sodkit/interaction.hpp"

#include <algorithm>
#include <cmath>

namespace sodkit {

Tensor channel_attention(const Tensor& f, const SeParams& se) {
  if (f.rank() != 4) throw ShapeError("channel_attention expects [B, C, H, W]");
  const Tensor pooled = global_avg_pool(f);  // [B, C]
  const Tensor hidden = activate(linear(pooled, se.w1, se.b1), Activation::Relu);
  const Tensor gate = activate(linear(hidden, se.w2, se.b2), Activation::Sigmoid);  // [B, C]

  const std::int64_t batches = f.dim(0);
  const std::int64_t channels = f.dim(1);
  const std::int64_t plane = f.dim(2) * f.dim(3);
  Tensor out;
  out.dims = f.dims;
  out.data.resize(f.data.size());
  for (std::int64_t b = 0; b < batches; ++b) {
    for (std::int64_t c = 0; c < channels; ++c) {
      const float g = gate.at(b, c);
      const float* src = f.ptr() + (b * channels + c) * plane;
      float* dst = out.ptr() + (b * channels + c) * plane;
      for (std::int64_t i = 0; i < plane; ++i) dst[i] = src[i] * g;
    }
  }
  return out;
}

Tensor flatten_spatial(const Tensor& fmap) {
  if (fmap.rank() != 4) throw ShapeError("flatten_spatial expects [B, C, H, W]");
  const std::int64_t batches = fmap.dim(0);
  const std::int64_t channels = fmap.dim(1);
  const std::int64_t plane = fmap.dim(2) * fmap.dim(3);
  Tensor seq({batches, plane, channels});
  for (std::int64_t b = 0; b < batches; ++b) {
    const float* src = fmap.ptr() + b * channels * plane;
    float* dst = seq.ptr() + b * plane * channels;
    for (std::int64_t c = 0; c < channels; ++c) {
      for (std::int64_t p = 0; p < plane; ++p) dst[p * channels + c] = src[c * plane + p];
    }
  }
  return seq;
}

Tensor unflatten_spatial(const Tensor& seq, std::int64_t h, std::int64_t w) {
  if (seq.rank() != 3) throw ShapeError("unflatten_spatial expects [B, N, C]");
  if (seq.dim(1) != h * w) throw ShapeError("unflatten_spatial node count mismatch");
  const std::int64_t batches = seq.dim(0);
  const std::int64_t plane = seq.dim(1);
  const std::int64_t channels = seq.dim(2);
  Tensor fmap({batches, channels, h, w});
  for (std::int64_t b = 0; b < batches; ++b) {
    const float* src = seq.ptr() + b * plane * channels;
    float* dst = fmap.ptr() + b * channels * plane;
    for (std::int64_t p = 0; p < plane; ++p) {
      for (std::int64_t c = 0; c < channels; ++c) dst[c * plane + p] = src[p * channels + c];
    }
  }
  return fmap;
}

EmbeddedFeatures embed_and_flatten(const Tensor& f, const ConvParams& proj) {
  EmbeddedFeatures e;
  e.fmap = conv(f, proj);
  e.seq = flatten_spatial(e.fmap);
  return e;
}

Tensor propagate_uncertainty(const Tensor& x, const NormalizedGraph& g,
                             const std::array<Tensor, 3>& gcn) {
  if (x.rank() != 3) throw ShapeError("propagate_uncertainty expects [B, N, d]");
  const std::int64_t batches = x.dim(0);
  const std::int64_t n = x.dim(1);
  const std::int64_t d = x.dim(2);
  if (g.op.dim(0) != n) throw ShapeError("graph node count does not match sequence length");
  for (const Tensor& w : gcn) {
    if (w.rank() != 2 || w.dim(0) != d || w.dim(1) != d) {
      throw ShapeError("graph convolution weights must be [d, d]");
    }
  }

  Tensor cur;
  cur.dims = {n, d};
  Tensor out;
  out.dims = x.dims;
  out.data.resize(x.data.size());

  for (std::int64_t b = 0; b < batches; ++b) {
    cur.data.assign(x.ptr() + b * n * d, x.ptr() + (b + 1) * n * d);
    for (const Tensor& w : gcn) {
      const Tensor mixed = matmul2d(g.op, cur);     // [N, d]
      const Tensor update = matmul2d(mixed, w);     // [N, d]
      for (std::int64_t i = 0; i < n * d; ++i) {
        const float u = update.ptr()[i];
        cur.ptr()[i] += u > 0.0f ? u : 0.0f;
      }
    }
    std::copy(cur.data.begin(), cur.data.end(), out.ptr() + b * n * d);
  }
  return out;
}

Tensor uncertainty_map(const Tensor& x3, const MlpParams& mlp, std::int64_t h, std::int64_t w) {
  if (x3.rank() != 3) throw ShapeError("uncertainty_map expects [B, N, d]");
  if (x3.dim(1) != h * w) throw ShapeError("uncertainty_map node count mismatch");
  const std::int64_t batches = x3.dim(0);
  const std::int64_t n = x3.dim(1);
  const std::int64_t d = x3.dim(2);

  Tensor flat;
  flat.dims = {batches * n, d};
  flat.data = x3.data;
  const Tensor hidden = activate(linear(flat, mlp.w1, mlp.b1), Activation::Relu);
  const Tensor logit = linear(hidden, mlp.w2, mlp.b2);  // [B*N, 1]

  Tensor umap({batches, 1, h, w});
  for (std::int64_t i = 0; i < batches * n; ++i) {
    umap.ptr()[i] = static_cast<float>(1.0 / (1.0 + std::exp(-static_cast<double>(logit.ptr()[i]))));
  }
  return umap;
}

Tensor apply_uncertainty_gate(const Tensor& fmap, const Tensor& umap) {
  if (fmap.rank() != 4 || umap.rank() != 4) throw ShapeError("gate expects rank-4 tensors");
  if (umap.dim(1) != 1 || umap.dim(0) != fmap.dim(0) || umap.dim(2) != fmap.dim(2) ||
      umap.dim(3) != fmap.dim(3)) {
    throw ShapeError("uncertainty map must be [B, 1, H, W] matching the feature map");
  }
  const std::int64_t batches = fmap.dim(0);
  const std::int64_t channels = fmap.dim(1);
  const std::int64_t plane = fmap.dim(2) * fmap.dim(3);
  Tensor out;
  out.dims = fmap.dims;
  out.data.resize(fmap.data.size());
  for (std::int64_t b = 0; b < batches; ++b) {
    const float* u = umap.ptr() + b * plane;
    for (std::int64_t c = 0; c < channels; ++c) {
      const float* src = fmap.ptr() + (b * channels + c) * plane;
      float* dst = out.ptr() + (b * channels + c) * plane;
      for (std::int64_t i = 0; i < plane; ++i) dst[i] = src[i] * (1.0f + u[i]);
    }
  }
  return out;
}

Tensor uncertainty_gate(const Tensor& fmap, const Tensor& x3, const MlpParams& mlp) {
  return apply_uncertainty_gate(fmap, uncertainty_map(x3, mlp, fmap.dim(2), fmap.dim(3)));
}

Tensor fuse_adjacent(const Tensor& f_prime, const Tensor& f_hi, const FusePathParams& path) {
  if (f_prime.rank() != 4 || f_hi.rank() != 4) throw ShapeError("fuse_adjacent expects rank-4 maps");
  if (f_hi.dim(2) > f_prime.dim(2) || f_hi.dim(3) > f_prime.dim(3)) {
    throw ShapeError("fuse_adjacent expects the second argument to be the coarser level");
  }
  Tensor aligned = conv(f_hi, path.proj);
  aligned = bilinear_resize(aligned, f_prime.dim(2), f_prime.dim(3));
  const Tensor cat = concat_channels({&f_prime, &aligned});
  const Tensor mid = activate(conv(cat, path.conv1), Activation::Relu);
  return conv(mid, path.conv2);
}

Tensor cross_attention_fuse(const Tensor& f_prime, const Tensor& f_far,
                            const CrossPathParams& path) {
  if (f_prime.rank() != 4 || f_far.rank() != 4) {
    throw ShapeError("cross_attention_fuse expects rank-4 maps");
  }
  const std::int64_t h = f_prime.dim(2);
  const std::int64_t w = f_prime.dim(3);
  Tensor aligned = conv(f_far, path.proj);
  aligned = bilinear_resize(aligned, h, w);

  const Tensor q_seq = flatten_spatial(f_prime);
  const Tensor kv_seq = flatten_spatial(aligned);
  const Tensor attended = attention_apply(q_seq, kv_seq, path.attn);

  // Restore shape through the output map, then add back to the query stream.
  const std::int64_t batches = attended.dim(0);
  const std::int64_t n = attended.dim(1);
  const std::int64_t d = attended.dim(2);
  Tensor mapped({batches, n, d});
  Tensor slice;
  slice.dims = {n, d};
  for (std::int64_t b = 0; b < batches; ++b) {
    slice.data.assign(attended.ptr() + b * n * d, attended.ptr() + (b + 1) * n * d);
    const Tensor m = matmul2d(slice, path.out_map);
    std::copy(m.data.begin(), m.data.end(), mapped.ptr() + b * n * d);
  }
  return add(f_prime, unflatten_spatial(mapped, h, w));
}

std::array<Tensor, 4> interaction_forward(const LevelFeatures& levels,
                                   const std::array<InteractionLevelParams, 4>& params,
                                   const InteractionOptions& opt) {
  for (const Tensor& t : levels.levels) {
    if (t.rank() != 4) throw ParamError("interaction_forward requires all four levels");
  }

  std::array<Tensor, 4> out;
  for (std::int64_t l = 0; l < 4; ++l) {
    const Tensor& f = levels.levels[static_cast<std::size_t>(l)];
    const InteractionLevelParams& lp = params[static_cast<std::size_t>(l)];
    const std::int64_t h = f.dim(2);
    const std::int64_t w = f.dim(3);

    const Tensor attended = channel_attention(f, lp.se);
    const EmbeddedFeatures emb = embed_and_flatten(attended, lp.proj);

    const std::int64_t pool = opt.pool[static_cast<std::size_t>(l)];
    const Tensor pooled = pool > 1 ? avg_pool2d(emb.fmap, pool) : emb.fmap;
    const std::int64_t gh = pooled.dim(2);
    const std::int64_t gw = pooled.dim(3);
    const std::int64_t n = gh * gw;
    const Tensor seq = pool > 1 ? flatten_spatial(pooled) : emb.seq;

    // The graph is rebuilt from the current features of each batch element.
    GraphOptions gopt = opt.graph;
    gopt.neighbors = std::min<std::int64_t>(gopt.neighbors, n - 1);
    const std::int64_t batches = seq.dim(0);
    const std::int64_t d = seq.dim(2);
    Tensor x3;
    x3.dims = seq.dims;
    x3.data.resize(seq.data.size());
    Tensor one;
    one.dims = {1, n, d};
    for (std::int64_t b = 0; b < batches; ++b) {
      Tensor feats;
      feats.dims = {n, d};
      feats.data.assign(seq.ptr() + b * n * d, seq.ptr() + (b + 1) * n * d);
      const NormalizedGraph g = n > 1 ? build_graph(feats, {gh, gw}, gopt)
                                      : normalize_adjacency(Tensor({1, 1}), 0);
      one.data = std::move(feats.data);
      const Tensor prop = propagate_uncertainty(one, g, lp.gcn);
      std::copy(prop.data.begin(), prop.data.end(), x3.ptr() + b * n * d);
    }

    Tensor umap = uncertainty_map(x3, lp.unc_mlp, gh, gw);
    if (pool > 1) umap = bilinear_resize(umap, h, w);
    const Tensor f_prime = apply_uncertainty_gate(emb.fmap, umap);

    std::vector<Tensor> fused;
    for (std::size_t k = 0; k < lp.adjacent.size(); ++k) {
      const std::int64_t hi = l + static_cast<std::int64_t>(k) + 1;
      fused.push_back(fuse_adjacent(f_prime, levels.levels[static_cast<std::size_t>(hi)],
                                    lp.adjacent[k]));
    }
    if (lp.cross.has_value()) {
      fused.push_back(cross_attention_fuse(f_prime, levels.levels[3], *lp.cross));
    }

    Tensor agg;
    if (fused.empty()) {
      agg = f_prime;  // the topmost level has no coarser neighbors
    } else {
      std::vector<const Tensor*> parts;
      parts.reserve(fused.size());
      for (const Tensor& t : fused) parts.push_back(&t);
      agg = concat_channels(parts);
    }
    const Tensor mid = activate(conv(agg, lp.bottleneck1), Activation::Relu);
    out[static_cast<std::size_t>(l)] = conv(mid, lp.bottleneck2);
  }
  return out;
}

}  // namespace sodkit
