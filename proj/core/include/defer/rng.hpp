#pragma once

#include <cstdint>
#include <random>

namespace defer {

// splitmix64; used to turn (seed, salt) pairs into independent stream seeds.
inline std::uint64_t split_mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  return split_mix64(base + 0x9E3779B97F4A7C15ull * (salt + 1));
}

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace defer
