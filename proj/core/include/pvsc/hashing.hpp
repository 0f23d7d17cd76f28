#pragma once

#include <cstdint>
#include <string_view>

namespace pvsc {

// FNV-1a, used for config hashes and output-manifest checksums.
inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t seed = 0xcbf29ce484222325ull) {
  std::uint64_t hash = seed;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

}  // namespace pvsc
