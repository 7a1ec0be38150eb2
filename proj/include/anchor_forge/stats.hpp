#pragma once

#include <cstdint>

namespace anchor_forge {

/// Raw moments E[B^p], p = 1..4, of B ~ Binomial(m, 1/2).
struct BinomialMoments {
  int m = 0;
  double e1 = 0.0;
  double e2 = 0.0;
  double e3 = 0.0;
  double e4 = 0.0;

  double variance() const { return e2 - e1 * e1; }
};

/// Uses exact integer numerators over 2^p for m <= 64, doubles beyond.
BinomialMoments binomial_moments(int m);

/// E|B - m/2|^3 for even m: m^2 / 2^{m+2} * C(m, m/2).
double third_abs_moment_exact(int m);

/// m^{3/2} / sqrt(8 pi), valid for every m >= 1.
double third_abs_moment_bound(int m);

/// E|B - m/2|^3 by direct summation over the binomial law.
double third_abs_moment_enumerated(int m);

/// Smallest n with 2^{b+1} exp(-2 n delta^2) <= eta.
std::uint64_t hoeffding_sample_size(int b, double delta, double eta);

/// log of 2^{b+1} exp(-2 n delta^2), the uniform deviation bound.
double hoeffding_log_bound(int b, double delta, std::uint64_t n);

/// delta solving 2 exp(-2 n delta^2) = 1 - confidence for a single anchor.
double hoeffding_delta(std::uint64_t n, double confidence = 0.99);

}  // namespace anchor_forge
