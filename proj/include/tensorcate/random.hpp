#pragma once

#include <cstdint>
#include <random>

namespace tensorcate {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used to derive independent child seeds so that
/// parallel trials and restarts never share a stream.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Child seed for stream `stream` of parent `seed`. Counter-based: the value
/// depends only on (seed, stream), never on draw order.
constexpr std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(mix64(seed) ^ mix64(stream + 0x632BE59BD9B4E019ULL));
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  return Rng(split_seed(seed, stream));
}

// Named streams so call sites do not collide by accident.
namespace stream {
inline constexpr std::uint64_t kAnchors = 1;
inline constexpr std::uint64_t kBandwidth = 2;
inline constexpr std::uint64_t kPowerMethod = 3;
inline constexpr std::uint64_t kHoldout = 4;
inline constexpr std::uint64_t kSimulation = 5;
inline constexpr std::uint64_t kTrial = 6;
inline constexpr std::uint64_t kOracle = 7;
}  // namespace stream

}  // namespace tensorcate
