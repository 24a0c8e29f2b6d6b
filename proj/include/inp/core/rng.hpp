#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace inp {

/// 64-bit finalizer from SplitMix64.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Derives an independent stream seed from a base seed and a list of keys.
/// Every random stream in the project is keyed this way so results never
/// depend on evaluation order and checkpoints only need the base seed.
inline std::uint64_t stream_seed(std::uint64_t base, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = mix64(base);
  for (auto k : keys) h = mix64(h ^ mix64(k + 0x632BE59BD9B4E019ULL));
  return h;
}

inline std::uint64_t stream_seed(std::uint64_t base, std::string_view purpose,
                                 std::initializer_list<std::uint64_t> keys = {}) {
  std::uint64_t h = stream_seed(base, {fnv1a(purpose)});
  for (auto k : keys) h = mix64(h ^ mix64(k + 0x632BE59BD9B4E019ULL));
  return h;
}

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) built from 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller without cached state, so a stream's output
/// depends only on how many draws were taken.
double standard_normal(Rng& rng);

}  // namespace inp
