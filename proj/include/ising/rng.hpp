#pragma once

#include <cmath>
#include <cstdint>

namespace ising {

/**
 * Deterministic 64-bit generator: xoshiro256++ seeded through SplitMix64.
 *
 * Every stochastic routine in this library takes an explicit 64-bit seed and
 * derives one or more independent streams from it via stream(). Identical
 * (seed, stream id) pairs produce identical draws on every platform; the
 * stream layout of each routine is part of its documented behavior.
 *
 * Normal variates use the Box-Muller transform (two uniforms per draw, sine
 * branch discarded) so the mapping from the raw stream to variates is fixed.
 */
class Rng {
public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t z = seed;
    for (auto& s : state_) s = split_mix(z);
  }

  /// Independent sub-stream: used to give each dataset/chain its own stream.
  static Rng stream(std::uint64_t seed, std::uint64_t stream_id) {
    std::uint64_t z = seed ^ (0x9E3779B97F4A7C15ULL * (stream_id + 1));
    return Rng(mix(z));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; consumes exactly two uniforms.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n), n >= 1.
  std::uint64_t below(std::uint64_t n) {
    // Multiply-shift rejection-free mapping; bias is negligible for n << 2^64.
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  static std::uint64_t split_mix(std::uint64_t& z) {
    z += 0x9E3779B97F4A7C15ULL;
    return mix(z);
  }

  std::uint64_t state_[4];
};

}  // namespace ising
