#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace n2olab {

// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::string& path);

// Independent stream seed from a base seed (splitmix64 finaliser).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + stream + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace n2olab
