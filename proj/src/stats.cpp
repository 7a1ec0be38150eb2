#include "anchor_forge/stats.hpp"

#include <cmath>
#include <numbers>

#include "anchor_forge/errors.hpp"
#include "anchor_forge/sampling.hpp"

namespace anchor_forge {

BinomialMoments binomial_moments(int m) {
  if (m < 1) throw InvalidArgument("binomial_moments: m must be >= 1");
  BinomialMoments out;
  out.m = m;
  if (m <= 64) {
    using i128 = __int128;
    const i128 x = m;
    const i128 n1 = x;                                  // 2 e1
    const i128 n2 = x * x + x;                          // 4 e2
    const i128 n3 = x * x * x + 3 * x * x;              // 8 e3
    const i128 n4 = x * x * x * x + 6 * x * x * x + 3 * x * x - 2 * x;  // 16 e4
    out.e1 = std::ldexp(static_cast<double>(n1), -1);
    out.e2 = std::ldexp(static_cast<double>(n2), -2);
    out.e3 = std::ldexp(static_cast<double>(n3), -3);
    out.e4 = std::ldexp(static_cast<double>(n4), -4);
    return out;
  }
  const double x = m;
  out.e1 = x / 2;
  out.e2 = x * x / 4 + x / 4;
  out.e3 = x * x * x / 8 + 3 * x * x / 8;
  out.e4 = x * x * x * x / 16 + 3 * x * x * x / 8 + 3 * x * x / 16 - x / 8;
  return out;
}

double third_abs_moment_exact(int m) {
  if (m < 1) throw InvalidArgument("third_abs_moment_exact: m must be >= 1");
  if (m % 2 != 0) {
    throw InvalidArgument("third_abs_moment_exact: closed form needs even m; use third_abs_moment_enumerated");
  }
  const double x = m;
  return x * x / 4.0 * binomial_half_pmf(m, m / 2);
}

double third_abs_moment_bound(int m) {
  if (m < 1) throw InvalidArgument("third_abs_moment_bound: m must be >= 1");
  return std::pow(static_cast<double>(m), 1.5) / std::sqrt(8.0 * std::numbers::pi);
}

double third_abs_moment_enumerated(int m) {
  if (m < 0) throw InvalidArgument("third_abs_moment_enumerated: negative m");
  double s = 0.0;
  for (int k = 0; k <= m; ++k) {
    const double dev = std::abs(k - m / 2.0);
    s += binomial_half_pmf(m, k) * dev * dev * dev;
  }
  return s;
}

double hoeffding_log_bound(int b, double delta, std::uint64_t n) {
  return (b + 1) * std::numbers::ln2 - 2.0 * static_cast<double>(n) * delta * delta;
}

std::uint64_t hoeffding_sample_size(int b, double delta, double eta) {
  if (b < 1) throw InvalidArgument("hoeffding_sample_size: b must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("hoeffding_sample_size: delta must lie in (0, 1)");
  if (!(eta > 0.0 && eta < 1.0)) throw InvalidArgument("hoeffding_sample_size: eta must lie in (0, 1)");
  const double target = std::log(eta);
  const double raw = ((b + 1) * std::numbers::ln2 - target) / (2.0 * delta * delta);
  auto n = static_cast<std::uint64_t>(std::ceil(raw));
  // Guard the ceiling against rounding in either direction.
  while (n > 1 && hoeffding_log_bound(b, delta, n - 1) <= target) --n;
  while (hoeffding_log_bound(b, delta, n) > target) ++n;
  return n;
}

double hoeffding_delta(std::uint64_t n, double confidence) {
  if (n < 1) throw InvalidArgument("hoeffding_delta: n must be >= 1");
  if (!(confidence > 0.0 && confidence < 1.0)) throw InvalidArgument("hoeffding_delta: confidence in (0, 1)");
  return std::sqrt(std::log(2.0 / (1.0 - confidence)) / (2.0 * static_cast<double>(n)));
}

}  // namespace anchor_forge
