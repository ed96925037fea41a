#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace dora {

// Deterministic random stream (splitmix64). Every random decision in the
// simulator flows through one of these; there is no wall-clock or OS entropy
// anywhere, so a run is a pure function of its seed.
class RandomStream {
 public:
  RandomStream() = default;
  explicit RandomStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // [0, 1) with 53-bit resolution; one raw draw.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // [0, bound); one raw draw. Multiply-shift map; bias is negligible for
  // grid-sized bounds.
  std::uint32_t uniform_below(std::uint32_t bound) {
    return static_cast<std::uint32_t>(
        (static_cast<std::uint64_t>(next_u64() >> 32) * bound) >> 32);
  }

  // N(0, sigma) via Box-Muller; consumes exactly two raw draws.
  double normal(double sigma) {
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps the log finite
    const double u2 = uniform01();
    return sigma * std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // [0, 2*pi); one raw draw.
  double uniform_angle() { return uniform01() * 2.0 * std::numbers::pi; }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_ = 0x853C49E6748FEA9Bull;
};

// Substream splitting rule: substream `stream` of a master seed is the
// splitmix64 finalizer of seed + (stream+1) * golden ratio. Documented so
// traces can be reproduced outside this codebase.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline RandomStream derive_stream(std::uint64_t seed, std::uint64_t stream) {
  return RandomStream(derive_seed(seed, stream));
}

// Fixed substream assignment for a simulation run.
namespace streams {
inline constexpr std::uint64_t kWorld = 0;
inline constexpr std::uint64_t kPlacement = 1;
inline constexpr std::uint64_t kNetwork = 2;
inline constexpr std::uint64_t kRobotBase = 16;  // robot i uses kRobotBase + i
}  // namespace streams

}  // namespace dora
