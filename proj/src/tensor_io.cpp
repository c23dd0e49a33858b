#include "sodkit/tensor_io.hpp"

#include <cstring>
#include <fstream>
#include <vector>

namespace sodkit {

namespace {

constexpr char kMagic[4] = {'D', 'U', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

std::uint32_t load_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void store_u32_le(std::uint32_t v, unsigned char* p) {
  p[0] = static_cast<unsigned char>(v & 0xFF);
  p[1] = static_cast<unsigned char>((v >> 8) & 0xFF);
  p[2] = static_cast<unsigned char>((v >> 16) & 0xFF);
  p[3] = static_cast<unsigned char>((v >> 24) & 0xFF);
}

[[noreturn]] void fail_at(const std::string& path, std::int64_t offset, const std::string& why) {
  throw FormatError(path + ": " + why + " (byte offset " + std::to_string(offset) + ")");
}

}  // namespace

Tensor read_tensor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path + ": cannot open for reading");

  unsigned char header[12];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (in.gcount() != sizeof(header)) fail_at(path, in.gcount() < 0 ? 0 : in.gcount(), "truncated header");
  if (std::memcmp(header, kMagic, 4) != 0) fail_at(path, 0, "bad magic, expected DUPT");
  const std::uint32_t version = load_u32_le(header + 4);
  if (version != kVersion) fail_at(path, 4, "unsupported version " + std::to_string(version));
  const std::uint32_t rank = load_u32_le(header + 8);
  if (rank < 1 || rank > 4) fail_at(path, 8, "rank must be 1..4, got " + std::to_string(rank));

  std::vector<std::int64_t> dims(rank);
  std::int64_t count = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    if (in.gcount() != 4) fail_at(path, 12 + 4 * i, "truncated extent list");
    const std::uint32_t d = load_u32_le(buf);
    if (d < 1) fail_at(path, 12 + 4 * i, "extents must be >= 1");
    dims[i] = static_cast<std::int64_t>(d);
    count *= dims[i];
  }

  const std::int64_t payload_offset = 12 + 4 * static_cast<std::int64_t>(rank);
  std::vector<float> values(static_cast<std::size_t>(count));
  in.read(reinterpret_cast<char*>(values.data()), count * 4);
  if (in.gcount() != count * 4) {
    fail_at(path, payload_offset + (in.gcount() < 0 ? 0 : in.gcount()),
            "payload length mismatch: expected " + std::to_string(count * 4) + " bytes");
  }
  // Trailing bytes mean the extents and payload disagree.
  char extra;
  in.read(&extra, 1);
  if (in.gcount() != 0) fail_at(path, payload_offset + count * 4, "trailing bytes after payload");

  return Tensor::from(std::move(dims), std::move(values));
}

void write_tensor(const std::string& path, const Tensor& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(path + ": cannot open for writing");
  unsigned char header[12];
  std::memcpy(header, kMagic, 4);
  store_u32_le(kVersion, header + 4);
  store_u32_le(static_cast<std::uint32_t>(t.rank()), header + 8);
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  for (std::int64_t i = 0; i < t.rank(); ++i) {
    unsigned char buf[4];
    store_u32_le(static_cast<std::uint32_t>(t.dim(i)), buf);
    out.write(reinterpret_cast<const char*>(buf), 4);
  }
  out.write(reinterpret_cast<const char*>(t.ptr()), t.numel() * 4);
  if (!out) throw FormatError(path + ": write failed");
}

}  // namespace sodkit
