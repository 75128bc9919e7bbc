#pragma once

#include <cstdint>
#include <random>

namespace gapf {

/// Seedable random source. Every consumer takes one by reference so that
/// parallel callers own independent streams.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive well-separated stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based stream: the same (seed, a, b) always yields the same
/// generator state, independent of thread scheduling.
inline Rng make_stream(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t s = mix64(seed);
  s = mix64(s ^ mix64(a + 0x632be59bd9b4e019ULL));
  s = mix64(s ^ mix64(b + 0x85157af5c2a3b9d1ULL));
  return Rng(s);
}

// Stream tags so that distinct consumers never share a counter space.
enum class StreamTag : std::uint64_t {
  kInit = 1,
  kParticle = 2,
  kResample = 3,
  kSensor = 4,
  kModelSampling = 5,
  kSensorSampling = 6,
};

inline Rng make_stream(std::uint64_t seed, StreamTag tag, std::uint64_t a, std::uint64_t b = 0) {
  return make_stream(seed ^ mix64(static_cast<std::uint64_t>(tag) << 56), a, b);
}

}  // namespace gapf
