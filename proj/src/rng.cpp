#include "decaylab/rng.hpp"

#include <cmath>
#include <numbers>

namespace decaylab {

std::uint64_t SplitMix64::next() {
  state_ += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint32_t SplitMix64::below(std::uint32_t n) {
  const std::uint64_t hi = next() >> 32;
  return static_cast<std::uint32_t>((hi * n) >> 32);
}

double SplitMix64::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t root, std::string_view label) {
  SplitMix64 g(root ^ fnv1a(label));
  return g.next();
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
  SplitMix64 g(root ^ (index * 0xD1B54A32D192ED03ULL));
  return g.next();
}

}  // namespace decaylab
