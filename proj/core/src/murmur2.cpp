#include <cmath>
#include <stdexcept>

#include "falcon/visited.hpp"

namespace falcon {

// MurmurHash2 (Austin Appleby) specialised to len == 4: one body round, no tail.
std::uint32_t murmur2(std::uint32_t key, std::uint32_t seed) noexcept {
  constexpr std::uint32_t m = 0x5bd1e995u;
  constexpr int r = 24;

  std::uint32_t h = seed ^ 4u;
  std::uint32_t k = key;
  k *= m;
  k ^= k >> r;
  k *= m;
  h *= m;
  h ^= k;

  h ^= h >> 13;
  h *= m;
  h ^= h >> 15;
  return h;
}

double theoretical_fpr(unsigned hashes, std::uint64_t bits, std::uint64_t inserted) {
  if (hashes == 0 || bits == 0) throw std::invalid_argument("theoretical_fpr: h and b must be >= 1");
  const double h = hashes;
  const double fill = 1.0 - std::exp(-h * static_cast<double>(inserted) / static_cast<double>(bits));
  return std::pow(fill, h);
}

}  // namespace falcon
