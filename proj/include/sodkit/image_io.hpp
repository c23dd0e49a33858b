#pragma once

#include <string>

#include "sodkit/tensor.hpp"

namespace sodkit {

// Binary netpbm readers/writers. P5 (grayscale) and P6 (RGB) with maxval 255
// are supported; pixel value v maps to v/255 in [0, 1].

// Returns [1, H, W] for P5 and [3, H, W] for P6.
Tensor read_image(const std::string& path);

// Writes [H, W] or [1, H, W] as P5 with round-half-up quantization, so
// read(write(read(f))) is bit-exact.
void write_image_gray(const std::string& path, const Tensor& img);

// Writes [3, H, W] as P6.
void write_image_rgb(const std::string& path, const Tensor& img);

}  // namespace sodkit
