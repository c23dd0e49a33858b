#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sodkit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mismatched tensor extents or rank.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid argument or configuration value.
class ParamError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Non-finite values where finite ones are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Dense row-major float32 tensor, rank 1..4. Rank-4 tensors follow the
// [batch, channels, height, width] convention. All reductions inside the
// ops below accumulate in double and round once to float at the end, and
// every op visits elements in a fixed order, so identical inputs always
// produce bit-identical outputs.
struct Tensor {
  std::vector<std::int64_t> dims;
  std::vector<float> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::int64_t> shape);
  Tensor(std::vector<std::int64_t> shape, float fill);
  static Tensor from(std::vector<std::int64_t> shape, std::vector<float> values);

  std::int64_t rank() const { return static_cast<std::int64_t>(dims.size()); }
  std::int64_t dim(std::int64_t i) const { return dims[static_cast<std::size_t>(i)]; }
  std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
  bool same_shape(const Tensor& o) const { return dims == o.dims; }

  float* ptr() { return data.data(); }
  const float* ptr() const { return data.data(); }

  float& at(std::int64_t i0) { return data[static_cast<std::size_t>(i0)]; }
  float at(std::int64_t i0) const { return data[static_cast<std::size_t>(i0)]; }
  float& at(std::int64_t i0, std::int64_t i1) {
    return data[static_cast<std::size_t>(i0 * dims[1] + i1)];
  }
  float at(std::int64_t i0, std::int64_t i1) const {
    return data[static_cast<std::size_t>(i0 * dims[1] + i1)];
  }
  float& at(std::int64_t i0, std::int64_t i1, std::int64_t i2) {
    return data[static_cast<std::size_t>((i0 * dims[1] + i1) * dims[2] + i2)];
  }
  float at(std::int64_t i0, std::int64_t i1, std::int64_t i2) const {
    return data[static_cast<std::size_t>((i0 * dims[1] + i1) * dims[2] + i2)];
  }
  float& at(std::int64_t i0, std::int64_t i1, std::int64_t i2, std::int64_t i3) {
    return data[static_cast<std::size_t>(((i0 * dims[1] + i1) * dims[2] + i2) * dims[3] + i3)];
  }
  float at(std::int64_t i0, std::int64_t i1, std::int64_t i2, std::int64_t i3) const {
    return data[static_cast<std::size_t>(((i0 * dims[1] + i1) * dims[2] + i2) * dims[3] + i3)];
  }
};

// SplitMix64 stream. Same seed yields the same sequence on every platform,
// which keeps initialized parameters and golden files portable.
struct Prng {
  std::uint64_t state = 0;

  explicit Prng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

// Weights of one convolution: weight [C_out, C_in, k, k], bias [C_out],
// kernel k in {1, 3}. k=3 implies padding 1 (shape-preserving at stride 1),
// k=1 implies padding 0.
struct ConvParams {
  Tensor weight;
  Tensor bias;

  std::int64_t out_channels() const { return weight.dim(0); }
  std::int64_t in_channels() const { return weight.dim(1); }
  std::int64_t kernel() const { return weight.dim(2); }
};

enum class Activation { Relu, Sigmoid };

// Cross-correlation (no kernel flip), stride 1, zero padding per the kernel
// rule above. Spatial extents are preserved.
Tensor conv(const Tensor& x, const ConvParams& p);

// Same semantics with an arbitrary positive stride (used by the backbone).
Tensor conv_strided(const Tensor& x, const ConvParams& p, std::int64_t stride);

// Bilinear resampling with half-pixel centers: the source coordinate of an
// output pixel is (dst + 0.5) * (src_extent / dst_extent) - 0.5, clamped to
// [0, src_extent - 1].
Tensor bilinear_resize(const Tensor& x, std::int64_t out_h, std::int64_t out_w);

// Numerically stable softmax along the given axis (max-subtraction, double
// accumulation). Non-finite inputs raise NumericError.
Tensor softmax(const Tensor& x, std::int64_t axis);

Tensor activate(const Tensor& x, Activation kind);

// Exact 2-D matrix product: a [N,K] * b [K,M] -> [N,M]. Each output element
// accumulates over k in ascending order in double.
Tensor matmul2d(const Tensor& a, const Tensor& b);

// Batched variant: a [B,N,K] * b [B,K,M] -> [B,N,M].
Tensor matmul_batched(const Tensor& a, const Tensor& b);

// x [B,n] * w [m,n]^T + b [m] -> [B,m].
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);

// Entries i.i.d. uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)], drawn from
// the SplitMix64 stream in row-major order.
Tensor init_uniform(Prng& rng, std::vector<std::int64_t> dims, std::int64_t fan_in);

// Non-overlapping mean pooling by an integer factor along H and W.
Tensor avg_pool2d(const Tensor& x, std::int64_t factor);

// [B,C,H,W] -> [B,C] spatial means.
Tensor global_avg_pool(const Tensor& x);

// Concatenate rank-4 tensors along the channel axis.
Tensor concat_channels(const std::vector<const Tensor*>& parts);

Tensor add(const Tensor& a, const Tensor& b);

}  // namespace sodkit
