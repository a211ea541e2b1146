#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace krrpm {

// SplitMix64: a counter-based 64-bit generator.  Output i is a fixed
// bijective mix of seed + i * 0x9E3779B97F4A7C15 (constants from Steele,
// Lea & Flood, "Fast splittable pseudorandom number generators"), so a
// stream is fully determined by its seed and position.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Standard normal via Box-Muller; consumes two uniforms per pair of draws.
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - next_double();  // (0, 1], keeps the log finite
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  // Deterministic (seed, stream) -> substream seed derivation, so
  // independent consumers (e.g. Monte Carlo trials) never share state.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 g(seed ^ (0xD1B54A32D192ED03ull + stream * 0x9E3779B97F4A7C15ull));
    return g.next_u64();
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace krrpm
