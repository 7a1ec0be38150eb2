#include "anchor_forge/sampling.hpp"

#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>

#include "anchor_forge/errors.hpp"

namespace anchor_forge {

int Anchor::length() const { return std::accumulate(counts.begin(), counts.end(), 0); }

void validate_anchor(const LocalView& view, const Anchor& anchor) {
  if (anchor.counts.size() != view.size()) {
    throw InvalidArgument("anchor has " + std::to_string(anchor.counts.size()) + " entries, view has " +
                          std::to_string(view.size()) + " words");
  }
  for (std::size_t j = 0; j < view.size(); ++j) {
    if (anchor.counts[j] < 0 || anchor.counts[j] > view.mult[j]) {
      throw InvalidArgument("anchor count for '" + view.words[j] + "' outside [0, m_j]");
    }
  }
  if (anchor.length() < 1) throw InvalidArgument("the empty anchor is not a candidate");
}

Anchor full_anchor(const LocalView& view) { return Anchor{view.mult}; }

std::vector<std::string> anchor_words(const LocalView& view, const Anchor& anchor) {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < view.size() && j < anchor.counts.size(); ++j) {
    if (anchor.counts[j] > 0) out.push_back(view.words[j]);
  }
  return out;
}

std::set<std::string> anchor_word_set(const LocalView& view, const Anchor& anchor) {
  auto words = anchor_words(view, anchor);
  return {words.begin(), words.end()};
}

std::string render_anchor(const LocalView& view, const Anchor& anchor) {
  std::ostringstream out;
  bool first = true;
  for (std::size_t j = 0; j < view.size() && j < anchor.counts.size(); ++j) {
    if (anchor.counts[j] == 0) continue;
    if (!first) out << ' ';
    first = false;
    out << view.words[j];
    if (anchor.counts[j] > 1) out << " x" << anchor.counts[j];
  }
  return out.str();
}

Anchor to_multiplicity_anchor(const Document& example, const LocalView& view, const PositionalAnchor& anchor) {
  Anchor out{std::vector<int>(view.size(), 0)};
  for (std::size_t pos : anchor.kept_positions) {
    if (pos >= example.length()) throw InvalidArgument("positional anchor index out of range");
    auto j = view.index_of(example.tokens[pos]);
    if (!j) throw InvalidArgument("view does not match the example");
    ++out.counts[*j];
  }
  return out;
}

BernoulliSampler::BernoulliSampler(const LocalView& view, const Anchor& anchor) {
  if (anchor.counts.size() != view.size()) throw InvalidArgument("anchor and view sizes differ");
  base_.resize(view.size());
  free_.resize(view.size());
  for (std::size_t j = 0; j < view.size(); ++j) {
    if (anchor.counts[j] < 0 || anchor.counts[j] > view.mult[j]) {
      throw InvalidArgument("anchor count outside [0, m_j]");
    }
    base_[j] = anchor.counts[j];
    free_[j] = view.mult[j] - anchor.counts[j];
  }
}

void BernoulliSampler::draw(SeededRng& rng, std::span<int> out) const {
  std::uint64_t buffer = 0;
  int bits_left = 0;
  for (std::size_t j = 0; j < base_.size(); ++j) {
    int k = free_[j];
    int drawn = 0;
    while (k >= 64) {
      drawn += std::popcount(rng.next_u64());
      k -= 64;
    }
    if (k > 0) {
      if (k > bits_left) {
        buffer = rng.next_u64();
        bits_left = 64;
      }
      const std::uint64_t mask = (std::uint64_t{1} << k) - 1;
      drawn += std::popcount(buffer & mask);
      buffer >>= k;
      bits_left -= k;
    }
    out[j] = base_[j] + drawn;
  }
}

std::vector<int> sample_bernoulli(const LocalView& view, const Anchor& anchor, SeededRng& rng) {
  BernoulliSampler sampler(view, anchor);
  std::vector<int> out(view.size());
  sampler.draw(rng, out);
  return out;
}

std::vector<Document> sample_three_step(const Document& example, const PositionalAnchor& anchor,
                                        std::size_t n, SeededRng& rng) {
  if (n < 1) throw InvalidArgument("sample_three_step: n must be >= 1");
  for (std::size_t pos : anchor.kept_positions) {
    if (pos >= example.length()) throw InvalidArgument("positional anchor index out of range");
  }
  std::vector<Document> copies(n, example);
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < example.length(); ++k) {
    if (anchor.kept_positions.count(k)) continue;
    const auto replaced = static_cast<std::size_t>(rng.binomial_half(static_cast<int>(n)));
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Partial Fisher-Yates: the first `replaced` slots form a uniform subset.
    for (std::size_t i = 0; i < replaced; ++i) {
      const std::size_t pick = i + rng.uniform_below(n - i);
      std::swap(order[i], order[pick]);
      copies[order[i]].tokens[k] = std::string(kUnkToken);
    }
  }
  return copies;
}

double binomial_half_pmf(int n, int k) {
  if (n < 0 || k < 0 || k > n) return 0.0;
  if (n <= 62) {
    unsigned __int128 c = 1;
    const int kk = std::min(k, n - k);
    for (int i = 1; i <= kk; ++i) c = c * static_cast<unsigned>(n - kk + i) / static_cast<unsigned>(i);
    return std::ldexp(static_cast<double>(c), -n);
  }
  const double log_c = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  return std::exp(log_c - n * std::log(2.0));
}

double MultiplicityLaw::pmf(int value) const {
  const int k = value - first;
  if (k < 0 || k >= static_cast<int>(mass.size())) return 0.0;
  return mass[static_cast<std::size_t>(k)];
}

double MultiplicityLaw::mean() const {
  double s = 0.0;
  for (std::size_t k = 0; k < mass.size(); ++k) s += mass[k] * (first + static_cast<double>(k));
  return s;
}

double MultiplicityLaw::variance() const {
  const double mu = mean();
  double s = 0.0;
  for (std::size_t k = 0; k < mass.size(); ++k) {
    const double dev = first + static_cast<double>(k) - mu;
    s += mass[k] * dev * dev;
  }
  return s;
}

MultiplicityLaw multiplicity_law(int m, int a) {
  if (a < 0 || m < 0) throw InvalidArgument("multiplicity_law: negative count");
  if (a > m) throw InvalidArgument("multiplicity_law: anchored count exceeds multiplicity");
  MultiplicityLaw law;
  law.first = a;
  const int free = m - a;
  law.mass.resize(static_cast<std::size_t>(free) + 1);
  for (int k = 0; k <= free; ++k) law.mass[static_cast<std::size_t>(k)] = binomial_half_pmf(free, k);
  return law;
}

}  // namespace anchor_forge
