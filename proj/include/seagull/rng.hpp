#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace seagull {

/// Counter-based 64-bit generator.
///
/// Output i of a stream with key k is splitmix64_finalize(k + (i + 1) * gamma),
/// i.e. SplitMix64 viewed as a keyed counter hash. Every random quantity in
/// the project is drawn from a stream whose key is derived from
/// (seed, purpose, index), so results do not depend on call order across
/// unrelated consumers, thread scheduling, or the standard library's
/// distribution implementations.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t key) noexcept : key_(key) {}

  /// Independent stream for (seed, purpose, index).
  static Rng stream(std::uint64_t seed, std::string_view purpose, std::uint64_t index = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return next_u64(); }
  std::uint64_t next_u64() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller (one draw per call, two uniforms consumed).
  double normal() noexcept;
  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64_finalize(std::uint64_t z) noexcept;
std::uint64_t hash_purpose(std::string_view purpose) noexcept;

}  // namespace seagull
