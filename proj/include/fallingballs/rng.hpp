#pragma once

#include <cmath>
#include <cstdint>

namespace fallingballs {

// Finalizer of the SplitMix64 generator (Steele, Lea & Flood 2014).
// Bijective on uint64, so distinct inputs give distinct outputs.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

constexpr std::uint64_t kGolden64 = 0x9E3779B97F4A7C15ULL;

// Stateless stream derivation used by every batch orchestrator in this
// project:
//
//   derive_seed(master, i) = mix64(master + (i + 1) * 0x9E3779B97F4A7C15)
//
// The additive constant is odd, so (i+1)*kGolden64 is injective mod 2^64 and
// derive_seed(master, .) never collides for a fixed master seed. Published
// test vectors live in docs/derive_seed_vectors.txt.
constexpr std::uint64_t derive_seed(std::uint64_t master_seed,
                                    std::uint64_t trial_index) {
  return mix64(master_seed + (trial_index + 1) * kGolden64);
}

// SplitMix64: the project-wide PRNG. 64-bit state, fixed published update,
// no implementation-defined behavior, so every sampled quantity is stable
// across platforms and releases.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += kGolden64;
    return mix64(state_);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Multiply-shift; bias is < n / 2^64, irrelevant for the small n used here.
    unsigned __int128 wide =
        static_cast<unsigned __int128>(next()) * static_cast<unsigned __int128>(n);
    return static_cast<std::uint64_t>(wide >> 64);
  }

  // Standard exponential via inversion.
  double exponential() {
    double u;
    do {
      u = uniform01();
    } while (u <= 0.0);
    return -std::log(u);
  }

 private:
  std::uint64_t state_;
};

}  // namespace fallingballs
