#include "sodkit/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sodkit {

namespace {

std::int64_t shape_product(const std::vector<std::int64_t>& shape) {
  std::int64_t n = 1;
  for (std::int64_t d : shape) n *= d;
  return n;
}

void check_shape_valid(const std::vector<std::int64_t>& shape) {
  if (shape.empty() || shape.size() > 4) {
    throw ShapeError("tensor rank must be 1..4, got " + std::to_string(shape.size()));
  }
  for (std::int64_t d : shape) {
    if (d < 1) throw ShapeError("tensor extents must be >= 1");
  }
}

void check_rank(const Tensor& t, std::int64_t rank, const char* what) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(what) + ": expected rank " + std::to_string(rank) +
                     ", got " + std::to_string(t.rank()));
  }
}

}  // namespace

Tensor::Tensor(std::vector<std::int64_t> shape) : dims(std::move(shape)) {
  check_shape_valid(dims);
  data.assign(static_cast<std::size_t>(shape_product(dims)), 0.0f);
}

Tensor::Tensor(std::vector<std::int64_t> shape, float fill) : dims(std::move(shape)) {
  check_shape_valid(dims);
  data.assign(static_cast<std::size_t>(shape_product(dims)), fill);
}

Tensor Tensor::from(std::vector<std::int64_t> shape, std::vector<float> values) {
  check_shape_valid(shape);
  if (shape_product(shape) != static_cast<std::int64_t>(values.size())) {
    throw ShapeError("value count does not match shape product");
  }
  Tensor t;
  t.dims = std::move(shape);
  t.data = std::move(values);
  return t;
}

Tensor conv_strided(const Tensor& x, const ConvParams& p, std::int64_t stride) {
  check_rank(x, 4, "conv input");
  check_rank(p.weight, 4, "conv weight");
  check_rank(p.bias, 1, "conv bias");
  const std::int64_t k = p.kernel();
  if (k != 1 && k != 3) throw ParamError("conv kernel must be 1 or 3");
  if (p.weight.dim(3) != k) throw ShapeError("conv kernel must be square");
  if (p.bias.dim(0) != p.out_channels()) throw ShapeError("conv bias length mismatch");
  if (stride < 1) throw ParamError("conv stride must be >= 1");
  if (x.dim(1) != p.in_channels()) {
    throw ShapeError("conv channel mismatch: input has " + std::to_string(x.dim(1)) +
                     ", weights expect " + std::to_string(p.in_channels()));
  }

  const std::int64_t batches = x.dim(0);
  const std::int64_t c_in = x.dim(1);
  const std::int64_t h = x.dim(2);
  const std::int64_t w = x.dim(3);
  const std::int64_t c_out = p.out_channels();
  const std::int64_t pad = (k == 3) ? 1 : 0;
  const std::int64_t out_h = (h + 2 * pad - k) / stride + 1;
  const std::int64_t out_w = (w + 2 * pad - k) / stride + 1;
  if (out_h < 1 || out_w < 1) throw ShapeError("conv output would be empty");

  Tensor out({batches, c_out, out_h, out_w});
  std::vector<double> acc(static_cast<std::size_t>(out_w));
  const float* wdata = p.weight.ptr();

  for (std::int64_t b = 0; b < batches; ++b) {
    for (std::int64_t co = 0; co < c_out; ++co) {
      const double bias = p.bias.at(co);
      for (std::int64_t oy = 0; oy < out_h; ++oy) {
        std::fill(acc.begin(), acc.end(), bias);
        for (std::int64_t ci = 0; ci < c_in; ++ci) {
          const float* wplane = wdata + ((co * c_in + ci) * k) * k;
          for (std::int64_t ky = 0; ky < k; ++ky) {
            const std::int64_t iy = oy * stride - pad + ky;
            if (iy < 0 || iy >= h) continue;
            const float* xrow = x.ptr() + (((b * c_in + ci) * h + iy) * w);
            for (std::int64_t kx = 0; kx < k; ++kx) {
              const double wv = wplane[ky * k + kx];
              const std::int64_t off = kx - pad;
              // valid output columns: 0 <= ox*stride + off < w
              std::int64_t lo = 0;
              if (off < 0) lo = (-off + stride - 1) / stride;
              std::int64_t hi = (w - 1 - off) / stride + 1;
              if (hi > out_w) hi = out_w;
              if (stride == 1) {
                const float* src = xrow + off;
                for (std::int64_t ox = lo; ox < hi; ++ox) {
                  acc[static_cast<std::size_t>(ox)] += static_cast<double>(src[ox]) * wv;
                }
              } else {
                for (std::int64_t ox = lo; ox < hi; ++ox) {
                  acc[static_cast<std::size_t>(ox)] +=
                      static_cast<double>(xrow[ox * stride + off]) * wv;
                }
              }
            }
          }
        }
        float* orow = out.ptr() + (((b * c_out + co) * out_h + oy) * out_w);
        for (std::int64_t ox = 0; ox < out_w; ++ox) {
          orow[ox] = static_cast<float>(acc[static_cast<std::size_t>(ox)]);
        }
      }
    }
  }
  return out;
}

Tensor conv(const Tensor& x, const ConvParams& p) { return conv_strided(x, p, 1); }

Tensor bilinear_resize(const Tensor& x, std::int64_t out_h, std::int64_t out_w) {
  check_rank(x, 4, "bilinear_resize input");
  if (out_h < 1 || out_w < 1) throw ParamError("bilinear_resize target extents must be >= 1");

  const std::int64_t batches = x.dim(0);
  const std::int64_t channels = x.dim(1);
  const std::int64_t h = x.dim(2);
  const std::int64_t w = x.dim(3);

  struct Axis {
    std::int64_t i0, i1;
    double frac;
  };
  auto make_axis = [](std::int64_t src, std::int64_t dst) {
    std::vector<Axis> axis(static_cast<std::size_t>(dst));
    const double scale = static_cast<double>(src) / static_cast<double>(dst);
    for (std::int64_t i = 0; i < dst; ++i) {
      double s = (static_cast<double>(i) + 0.5) * scale - 0.5;
      if (s < 0.0) s = 0.0;
      const double max_s = static_cast<double>(src - 1);
      if (s > max_s) s = max_s;
      const std::int64_t i0 = static_cast<std::int64_t>(std::floor(s));
      axis[static_cast<std::size_t>(i)] = {i0, std::min<std::int64_t>(i0 + 1, src - 1),
                                           s - static_cast<double>(i0)};
    }
    return axis;
  };
  const auto ys = make_axis(h, out_h);
  const auto xs = make_axis(w, out_w);

  Tensor out({batches, channels, out_h, out_w});
  for (std::int64_t b = 0; b < batches; ++b) {
    for (std::int64_t c = 0; c < channels; ++c) {
      const float* plane = x.ptr() + ((b * channels + c) * h) * w;
      float* oplane = out.ptr() + ((b * channels + c) * out_h) * out_w;
      for (std::int64_t oy = 0; oy < out_h; ++oy) {
        const Axis& ay = ys[static_cast<std::size_t>(oy)];
        const float* r0 = plane + ay.i0 * w;
        const float* r1 = plane + ay.i1 * w;
        const double fy = ay.frac;
        for (std::int64_t ox = 0; ox < out_w; ++ox) {
          const Axis& ax = xs[static_cast<std::size_t>(ox)];
          const double fx = ax.frac;
          const double top = (1.0 - fx) * r0[ax.i0] + fx * r0[ax.i1];
          const double bot = (1.0 - fx) * r1[ax.i0] + fx * r1[ax.i1];
          oplane[oy * out_w + ox] = static_cast<float>((1.0 - fy) * top + fy * bot);
        }
      }
    }
  }
  return out;
}

Tensor softmax(const Tensor& x, std::int64_t axis) {
  if (axis < 0 || axis >= x.rank()) throw ParamError("softmax axis out of range");
  const std::int64_t n = x.dim(axis);
  std::int64_t outer = 1, inner = 1;
  for (std::int64_t i = 0; i < axis; ++i) outer *= x.dim(i);
  for (std::int64_t i = axis + 1; i < x.rank(); ++i) inner *= x.dim(i);

  Tensor out;
  out.dims = x.dims;
  out.data.resize(x.data.size());
  std::vector<double> buf(static_cast<std::size_t>(n));

  for (std::int64_t o = 0; o < outer; ++o) {
    for (std::int64_t in = 0; in < inner; ++in) {
      const std::int64_t base = o * n * inner + in;
      double maxv = -std::numeric_limits<double>::infinity();
      for (std::int64_t i = 0; i < n; ++i) {
        const float v = x.data[static_cast<std::size_t>(base + i * inner)];
        if (!std::isfinite(v)) throw NumericError("softmax input must be finite");
        if (v > maxv) maxv = v;
      }
      double sum = 0.0;
      for (std::int64_t i = 0; i < n; ++i) {
        const double e =
            std::exp(static_cast<double>(x.data[static_cast<std::size_t>(base + i * inner)]) - maxv);
        buf[static_cast<std::size_t>(i)] = e;
        sum += e;
      }
      for (std::int64_t i = 0; i < n; ++i) {
        out.data[static_cast<std::size_t>(base + i * inner)] =
            static_cast<float>(buf[static_cast<std::size_t>(i)] / sum);
      }
    }
  }
  return out;
}

Tensor activate(const Tensor& x, Activation kind) {
  Tensor out;
  out.dims = x.dims;
  out.data.resize(x.data.size());
  if (kind == Activation::Relu) {
    for (std::size_t i = 0; i < x.data.size(); ++i) {
      const float v = x.data[i];
      out.data[i] = v > 0.0f ? v : 0.0f;
    }
  } else {
    for (std::size_t i = 0; i < x.data.size(); ++i) {
      out.data[i] = static_cast<float>(1.0 / (1.0 + std::exp(-static_cast<double>(x.data[i]))));
    }
  }
  return out;
}

namespace {

// out[i,j] = sum_k a[i,k] * b[k,j], k ascending, double accumulator per
// output element. The k-outer / j-inner arrangement keeps the inner loop
// independent per j while preserving that accumulation order.
void matmul2d_into(const float* a, const float* b, float* o, std::int64_t n, std::int64_t k,
                   std::int64_t m, std::vector<double>& acc) {
  acc.assign(static_cast<std::size_t>(m), 0.0);
  for (std::int64_t i = 0; i < n; ++i) {
    std::fill(acc.begin(), acc.end(), 0.0);
    const float* arow = a + i * k;
    for (std::int64_t kk = 0; kk < k; ++kk) {
      const double av = arow[kk];
      const float* brow = b + kk * m;
      for (std::int64_t j = 0; j < m; ++j) {
        acc[static_cast<std::size_t>(j)] += av * static_cast<double>(brow[j]);
      }
    }
    float* orow = o + i * m;
    for (std::int64_t j = 0; j < m; ++j) {
      orow[j] = static_cast<float>(acc[static_cast<std::size_t>(j)]);
    }
  }
}

}  // namespace

Tensor matmul2d(const Tensor& a, const Tensor& b) {
  check_rank(a, 2, "matmul2d lhs");
  check_rank(b, 2, "matmul2d rhs");
  if (a.dim(1) != b.dim(0)) throw ShapeError("matmul2d inner extents disagree");
  Tensor out({a.dim(0), b.dim(1)});
  std::vector<double> acc;
  matmul2d_into(a.ptr(), b.ptr(), out.ptr(), a.dim(0), a.dim(1), b.dim(1), acc);
  return out;
}

Tensor matmul_batched(const Tensor& a, const Tensor& b) {
  check_rank(a, 3, "matmul_batched lhs");
  check_rank(b, 3, "matmul_batched rhs");
  if (a.dim(0) != b.dim(0)) throw ShapeError("matmul_batched batch extents disagree");
  if (a.dim(2) != b.dim(1)) throw ShapeError("matmul_batched inner extents disagree");
  const std::int64_t batches = a.dim(0);
  const std::int64_t n = a.dim(1);
  const std::int64_t k = a.dim(2);
  const std::int64_t m = b.dim(2);
  Tensor out({batches, n, m});
  std::vector<double> acc;
  for (std::int64_t bb = 0; bb < batches; ++bb) {
    matmul2d_into(a.ptr() + bb * n * k, b.ptr() + bb * k * m, out.ptr() + bb * n * m, n, k, m, acc);
  }
  return out;
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  check_rank(x, 2, "linear input");
  check_rank(w, 2, "linear weight");
  check_rank(b, 1, "linear bias");
  if (x.dim(1) != w.dim(1)) throw ShapeError("linear input width mismatch");
  if (b.dim(0) != w.dim(0)) throw ShapeError("linear bias length mismatch");
  const std::int64_t rows = x.dim(0);
  const std::int64_t n = x.dim(1);
  const std::int64_t m = w.dim(0);
  Tensor out({rows, m});
  for (std::int64_t r = 0; r < rows; ++r) {
    const float* xrow = x.ptr() + r * n;
    for (std::int64_t j = 0; j < m; ++j) {
      const float* wrow = w.ptr() + j * n;
      double acc = b.at(j);
      for (std::int64_t i = 0; i < n; ++i) {
        acc += static_cast<double>(xrow[i]) * static_cast<double>(wrow[i]);
      }
      out.at(r, j) = static_cast<float>(acc);
    }
  }
  return out;
}

Tensor init_uniform(Prng& rng, std::vector<std::int64_t> dims, std::int64_t fan_in) {
  if (fan_in < 1) throw ParamError("init_uniform fan_in must be >= 1");
  Tensor t(std::move(dims));
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (auto& v : t.data) {
    v = static_cast<float>((2.0 * rng.next_unit() - 1.0) * bound);
  }
  return t;
}

Tensor avg_pool2d(const Tensor& x, std::int64_t factor) {
  check_rank(x, 4, "avg_pool2d input");
  if (factor < 1) throw ParamError("avg_pool2d factor must be >= 1");
  if (factor == 1) return x;
  const std::int64_t h = x.dim(2);
  const std::int64_t w = x.dim(3);
  if (h % factor != 0 || w % factor != 0) {
    throw ShapeError("avg_pool2d extents must be divisible by the factor");
  }
  const std::int64_t batches = x.dim(0);
  const std::int64_t channels = x.dim(1);
  const std::int64_t oh = h / factor;
  const std::int64_t ow = w / factor;
  const double inv = 1.0 / static_cast<double>(factor * factor);
  Tensor out({batches, channels, oh, ow});
  for (std::int64_t b = 0; b < batches; ++b) {
    for (std::int64_t c = 0; c < channels; ++c) {
      const float* plane = x.ptr() + ((b * channels + c) * h) * w;
      float* oplane = out.ptr() + ((b * channels + c) * oh) * ow;
      for (std::int64_t oy = 0; oy < oh; ++oy) {
        for (std::int64_t ox = 0; ox < ow; ++ox) {
          double s = 0.0;
          for (std::int64_t dy = 0; dy < factor; ++dy) {
            const float* row = plane + (oy * factor + dy) * w + ox * factor;
            for (std::int64_t dx = 0; dx < factor; ++dx) s += row[dx];
          }
          oplane[oy * ow + ox] = static_cast<float>(s * inv);
        }
      }
    }
  }
  return out;
}

Tensor global_avg_pool(const Tensor& x) {
  check_rank(x, 4, "global_avg_pool input");
  const std::int64_t batches = x.dim(0);
  const std::int64_t channels = x.dim(1);
  const std::int64_t plane = x.dim(2) * x.dim(3);
  Tensor out({batches, channels});
  for (std::int64_t b = 0; b < batches; ++b) {
    for (std::int64_t c = 0; c < channels; ++c) {
      const float* p = x.ptr() + (b * channels + c) * plane;
      double s = 0.0;
      for (std::int64_t i = 0; i < plane; ++i) s += p[i];
      out.at(b, c) = static_cast<float>(s / static_cast<double>(plane));
    }
  }
  return out;
}

Tensor concat_channels(const std::vector<const Tensor*>& parts) {
  if (parts.empty()) throw ParamError("concat_channels needs at least one input");
  const Tensor& first = *parts.front();
  check_rank(first, 4, "concat_channels input");
  std::int64_t total_c = 0;
  for (const Tensor* t : parts) {
    check_rank(*t, 4, "concat_channels input");
    if (t->dim(0) != first.dim(0) || t->dim(2) != first.dim(2) || t->dim(3) != first.dim(3)) {
      throw ShapeError("concat_channels inputs must agree on batch and spatial extents");
    }
    total_c += t->dim(1);
  }
  const std::int64_t batches = first.dim(0);
  const std::int64_t plane = first.dim(2) * first.dim(3);
  Tensor out({batches, total_c, first.dim(2), first.dim(3)});
  for (std::int64_t b = 0; b < batches; ++b) {
    std::int64_t c_off = 0;
    for (const Tensor* t : parts) {
      const std::int64_t c = t->dim(1);
      std::copy_n(t->ptr() + b * c * plane, static_cast<std::size_t>(c * plane),
                  out.ptr() + (b * total_c + c_off) * plane);
      c_off += c;
    }
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw ShapeError("add requires identical shapes");
  Tensor out;
  out.dims = a.dims;
  out.data.resize(a.data.size());
  for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] + b.data[i];
  return out;
}

}  // namespace sodkit
