#include "seagull/rng.hpp"

#include <cmath>
#include <numbers>

namespace seagull {

namespace {
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64_finalize(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// FNV-1a, then finalized so short purpose strings still spread across all bits.
std::uint64_t hash_purpose(std::string_view purpose) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : purpose) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return splitmix64_finalize(h);
}

Rng Rng::stream(std::uint64_t seed, std::string_view purpose, std::uint64_t index) noexcept {
  std::uint64_t k = splitmix64_finalize(seed + kGamma);
  k = splitmix64_finalize(k ^ hash_purpose(purpose));
  k = splitmix64_finalize(k + index * kGamma);
  return Rng(k);
}

std::uint64_t Rng::next_u64() noexcept {
  ++counter_;
  return splitmix64_finalize(key_ + counter_ * kGamma);
}

double Rng::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() noexcept {
  double u1 = uniform();
  while (u1 == 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::below(std::uint64_t n) noexcept {
  // Rejection on the top of the range keeps the result exactly uniform.
  const std::uint64_t limit = max() - max() % n;
  std::uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return x % n;
}

}  // namespace seagull
