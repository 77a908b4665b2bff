#pragma once

// Little-endian helpers shared by the on-disk containers and the wire protocol.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace falcon::io {

inline std::uint32_t load_u32(const std::byte* p) noexcept {
  std::uint32_t v;
  std::memcpy(&v, p, sizeof v);
  if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap32(v);
  return v;
}

inline float load_f32(const std::byte* p) noexcept {
  return std::bit_cast<float>(load_u32(p));
}

inline void append_u32(std::vector<std::byte>& out, std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap32(v);
  const auto* p = reinterpret_cast<const std::byte*>(&v);
  out.insert(out.end(), p, p + sizeof v);
}

inline void append_f32(std::vector<std::byte>& out, float v) {
  append_u32(out, std::bit_cast<std::uint32_t>(v));
}

/// Sequential little-endian reader over a byte buffer. Callers check remaining() first.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::byte> bytes) : bytes_(bytes) {}

  std::size_t offset() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
  bool at_end() const noexcept { return pos_ == bytes_.size(); }

  std::uint32_t u32() noexcept {
    const auto v = load_u32(bytes_.data() + pos_);
    pos_ += 4;
    return v;
  }
  float f32() noexcept { return std::bit_cast<float>(u32()); }

 private:
  std::span<const std::byte> bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::byte> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::byte> bytes);

}  // namespace falcon::io
