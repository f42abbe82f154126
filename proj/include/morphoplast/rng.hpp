#pragma once

#include <cstdint>

namespace morphoplast {

// SplitMix64 finaliser (Steele, Lea & Flood; constants from Vigna's
// reference implementation).
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

// Counter-based draw: the `counter`-th output (0-based) of a SplitMix64
// stream seeded with `key`. Pure function, identical on every platform.
constexpr std::uint64_t counter_u64(std::uint64_t key, std::uint64_t counter) {
  return splitmix64_mix(key + (counter + 1) * kGoldenGamma);
}

// Top 53 bits mapped to [0, 1).
constexpr double u64_to_unit(std::uint64_t v) {
  return static_cast<double>(v >> 11) * 0x1.0p-53;
}

// Derive an independent key from a parent key and a tag, e.g. (run seed,
// generation) or (bootstrap seed, resample index).
constexpr std::uint64_t derive_key(std::uint64_t parent, std::uint64_t tag) {
  return splitmix64_mix(splitmix64_mix(parent ^ 0xD1B54A32D192ED03ULL) + tag * kGoldenGamma);
}

// Sequential SplitMix64 stream. The i-th call to next() equals
// counter_u64(seed, i).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += kGoldenGamma;
    return splitmix64_mix(state_);
  }

  double uniform() { return u64_to_unit(next()); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n);

  // Standard normal via Box-Muller; caches the second variate.
  double normal();

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace morphoplast
