#pragma once

// Portable random draws. The standard <random> distributions are
// implementation-defined, so everything here is built directly on the raw
// 64-bit output of std::mt19937_64, which is fully specified.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace blindspot {

// 64-bit FNV-1a.
uint64_t fnv1a64(std::string_view bytes);

class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Rejection sampling keeps it unbiased.
  uint64_t below(uint64_t n);

  // Standard normal via Box-Muller (one variate per call).
  double normal();

  // Index drawn proportionally to `weights` (non-negative, positive sum).
  size_t categorical(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
};

}  // namespace blindspot
