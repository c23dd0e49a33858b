#include "sodkit/image_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

namespace sodkit {

namespace {

[[noreturn]] void fail_at(const std::string& path, std::int64_t offset, const std::string& why) {
  throw FormatError(path + ": " + why + " (byte offset " + std::to_string(offset) + ")");
}

// Skips netpbm whitespace and '#' comments, then parses a decimal integer.
std::int64_t read_header_int(std::istream& in, const std::string& path) {
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  if (c == EOF) fail_at(path, static_cast<std::int64_t>(in.tellg()), "truncated header");
  if (!std::isdigit(c)) fail_at(path, static_cast<std::int64_t>(in.tellg()) - 1, "expected integer");
  std::int64_t value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    if (value > (1 << 30)) fail_at(path, static_cast<std::int64_t>(in.tellg()), "integer overflow");
    c = in.get();
  }
  if (c != EOF) in.unget();
  return value;
}

std::vector<unsigned char> read_payload(std::istream& in, const std::string& path,
                                        std::int64_t count) {
  // Exactly one whitespace byte separates the header from the payload.
  const int sep = in.get();
  if (sep == EOF || !std::isspace(sep)) {
    fail_at(path, static_cast<std::int64_t>(in.tellg()), "missing payload separator");
  }
  std::vector<unsigned char> payload(static_cast<std::size_t>(count));
  in.read(reinterpret_cast<char*>(payload.data()), count);
  if (in.gcount() != count) {
    fail_at(path, static_cast<std::int64_t>(in.tellg()) + (in.gcount() < 0 ? 0 : in.gcount()),
            "truncated payload: expected " + std::to_string(count) + " bytes, got " +
                std::to_string(in.gcount()));
  }
  return payload;
}

}  // namespace

Tensor read_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path + ": cannot open for reading");
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (in.gcount() != 2 || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6')) {
    fail_at(path, 0, "bad magic: expected binary P5 or P6");
  }
  const bool rgb = magic[1] == '6';
  const std::int64_t w = read_header_int(in, path);
  const std::int64_t h = read_header_int(in, path);
  const std::int64_t maxval = read_header_int(in, path);
  if (w < 1 || h < 1) fail_at(path, static_cast<std::int64_t>(in.tellg()), "empty image");
  if (maxval != 255) {
    fail_at(path, static_cast<std::int64_t>(in.tellg()),
            "unsupported maxval " + std::to_string(maxval) + " (only 255 is supported)");
  }

  const std::int64_t channels = rgb ? 3 : 1;
  const auto payload = read_payload(in, path, h * w * channels);

  Tensor img({channels, h, w});
  // netpbm interleaves channels; the tensor is planar.
  for (std::int64_t y = 0; y < h; ++y) {
    for (std::int64_t x = 0; x < w; ++x) {
      for (std::int64_t c = 0; c < channels; ++c) {
        const unsigned char v = payload[static_cast<std::size_t>((y * w + x) * channels + c)];
        img.at(c, y, x) = static_cast<float>(static_cast<double>(v) / 255.0);
      }
    }
  }
  return img;
}

namespace {

unsigned char quantize(float v) {
  double q = std::floor(static_cast<double>(v) * 255.0 + 0.5);
  if (q < 0.0) q = 0.0;
  if (q > 255.0) q = 255.0;
  return static_cast<unsigned char>(q);
}

void write_pnm(const std::string& path, const Tensor& img, std::int64_t channels) {
  const std::int64_t h = img.dim(img.rank() - 2);
  const std::int64_t w = img.dim(img.rank() - 1);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(path + ": cannot open for writing");
  out << (channels == 3 ? "P6" : "P5") << "\n" << w << " " << h << "\n255\n";
  std::vector<unsigned char> payload(static_cast<std::size_t>(h * w * channels));
  const std::int64_t plane = h * w;
  const float* base = img.ptr();
  for (std::int64_t y = 0; y < h; ++y) {
    for (std::int64_t x = 0; x < w; ++x) {
      for (std::int64_t c = 0; c < channels; ++c) {
        payload[static_cast<std::size_t>((y * w + x) * channels + c)] =
            quantize(base[c * plane + y * w + x]);
      }
    }
  }
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
  if (!out) throw FormatError(path + ": write failed");
}

}  // namespace

void write_image_gray(const std::string& path, const Tensor& img) {
  if (img.rank() == 2 || (img.rank() == 3 && img.dim(0) == 1)) {
    write_pnm(path, img, 1);
    return;
  }
  throw ShapeError("write_image_gray expects [H, W] or [1, H, W]");
}

void write_image_rgb(const std::string& path, const Tensor& img) {
  if (img.rank() != 3 || img.dim(0) != 3) throw ShapeError("write_image_rgb expects [3, H, W]");
  write_pnm(path, img, 3);
}

}  // namespace sodkit
