#pragma once

#include <cstdint>
#include <limits>
#include <span>

namespace anchor_forge {

inline constexpr std::uint64_t kDefaultSeed = 20230425;

/// Counter-based 64-bit generator. Output i is a SplitMix64 finalization of
/// (key + i * golden), so a stream is fully determined by (seed, counter) and
/// independent streams can be derived by hashing a key into a new seed.
///
/// All distribution helpers are implemented here rather than through
/// <random> distributions, whose output is implementation-defined.
class SeededRng {
 public:
  using result_type = std::uint64_t;

  explicit SeededRng(std::uint64_t seed = kDefaultSeed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u64(); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();
  /// Unbiased uniform integer on [0, bound). bound must be positive.
  std::uint64_t uniform_below(std::uint64_t bound);
  /// Draw from Binomial(trials, 1/2) by counting set bits.
  int binomial_half(int trials);
  /// Standard normal draw (Box-Muller, one value per call).
  double normal();

  /// Independent stream keyed by this generator's seed and `key`.
  /// Does not advance this generator.
  SeededRng derive(std::span<const int> key) const;
  SeededRng derive(std::uint64_t key) const;

 private:
  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace anchor_forge
