#pragma once

#include <cstdint>
#include <string_view>

namespace decaylab {

/// SplitMix64: a counter-based 64-bit generator. The state advances by a fixed
/// odd increment and each output is a bijective mix of the counter, so the
/// stream is fully determined by the seed and trivially portable.
///
///   state += 0x9E3779B97F4A7C15
///   z = state
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
///
/// uniform() takes the top 53 bits: (next() >> 11) * 2^-53, in [0, 1).
/// normal() is Box-Muller on two uniforms, u1 mapped to (0, 1]:
///   sqrt(-2 ln(1 - u1)) * cos(2 pi u2); the sine branch is discarded so
/// each normal consumes exactly two draws.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Integer in [0, n). Uses multiply-shift on the top 32 bits; n must be > 0.
  std::uint32_t below(std::uint32_t n);
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

/// Child seed for a named component: one SplitMix64 step over
/// root ^ FNV-1a-64(label). Lets partial reruns reproduce any sub-stream.
std::uint64_t derive_seed(std::uint64_t root, std::string_view label);
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index);

}  // namespace decaylab
