#include "anchor_forge/rng.hpp"

#include <bit>
#include <cmath>
#include <numbers>

#include "anchor_forge/errors.hpp"

namespace anchor_forge {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

SeededRng::SeededRng(std::uint64_t seed) : seed_(seed), key_(mix64(seed + kGolden)) {}

std::uint64_t SeededRng::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double SeededRng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t SeededRng::uniform_below(std::uint64_t bound) {
  if (bound == 0) throw InvalidArgument("uniform_below: bound must be positive");
  // Lemire's multiply-shift with rejection.
  std::uint64_t x = next_u64();
  unsigned __int128 m = static_cast<unsigned __int128>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = next_u64();
      m = static_cast<unsigned __int128>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

int SeededRng::binomial_half(int trials) {
  if (trials < 0) throw InvalidArgument("binomial_half: negative trial count");
  int total = 0;
  while (trials >= 64) {
    total += std::popcount(next_u64());
    trials -= 64;
  }
  if (trials > 0) {
    const std::uint64_t mask = (std::uint64_t{1} << trials) - 1;
    total += std::popcount(next_u64() & mask);
  }
  return total;
}

double SeededRng::normal() {
  double u1 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

SeededRng SeededRng::derive(std::span<const int> key) const {
  std::uint64_t h = mix64(seed_ ^ 0x6A09E667F3BCC909ULL);
  for (int v : key) {
    h = mix64(h ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(v)) + kGolden));
  }
  h = mix64(h ^ static_cast<std::uint64_t>(key.size()));
  return SeededRng(h);
}

SeededRng SeededRng::derive(std::uint64_t key) const {
  return SeededRng(mix64(mix64(seed_ ^ 0xBB67AE8584CAA73BULL) ^ key));
}

}  // namespace anchor_forge
