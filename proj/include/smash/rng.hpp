#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace smash {

// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Portable generator behind every stochastic draw in the library. The draw
// sequence is part of the file-format contract: regenerating a matrix from
// its seed must reproduce the same bits on every platform.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t state) : state_(state) {}

  constexpr std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return splitmix64_mix(state_);
  }

  // (draw >> 11) * 2^-53. A zero draw is replaced by 2^-53 so the value is
  // strictly inside (0, 1).
  double uniform() {
    const std::uint64_t bits = next() >> 11;
    return static_cast<double>(bits == 0 ? 1 : bits) * 0x1.0p-53;
  }

  // Box-Muller on one uniform pair: (radius * cos, radius * sin).
  std::pair<double, double> gaussian_pair() {
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

  // +1 when the top bit of the draw is clear, -1 when it is set.
  double sign() { return (next() >> 63) ? -1.0 : 1.0; }

 private:
  std::uint64_t state_;
};

// Stream for a sub-unit (matrix row, noise frame, ...) of a seeded object.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t index) {
  return SplitMix64(splitmix64_mix(seed ^ index));
}

// Stream family for any purpose other than matrix rows. Plain substreams
// collide whenever seed1 ^ i == seed2 ^ j, so every other consumer mixes its
// seed with a purpose tag first.
inline SplitMix64 tagged_stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
  return substream(splitmix64_mix(seed ^ tag), index);
}

inline constexpr std::uint64_t kNoiseTag = 0x4E4F495345ULL;      // "NOISE"
inline constexpr std::uint64_t kJlVectorTag = 0x4A4C564543ULL;   // "JLVEC"
inline constexpr std::uint64_t kSvmOrderTag = 0x53564D4F52ULL;   // "SVMOR"
inline constexpr std::uint64_t kSynthTag = 0x53594E5448ULL;      // "SYNTH"
inline constexpr std::uint64_t kSynthNoiseTag = 0x53594E4E5AULL; // "SYNNZ"

// Fills out[0..n) with standard normals: cosine value first, then sine,
// consecutive uniform pairs. An odd tail drops the last sine value.
template <typename Out>
void fill_gaussian(SplitMix64& rng, Out&& out, std::size_t n) {
  std::size_t i = 0;
  while (i < n) {
    auto [c, s] = rng.gaussian_pair();
    out(i++, c);
    if (i < n) out(i++, s);
  }
}

}  // namespace smash
