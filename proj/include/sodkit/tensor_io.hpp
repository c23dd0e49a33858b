#pragma once

#include <string>

#include "sodkit/tensor.hpp"

namespace sodkit {

// "DUPT" tensor container: 4-byte magic, u32 version (= 1), u32 rank,
// rank x u32 extents, then float32 payload in row-major order. Everything is
// little-endian and round-trips bit-exactly.

Tensor read_tensor(const std::string& path);
void write_tensor(const std::string& path, const Tensor& t);

}  // namespace sodkit
