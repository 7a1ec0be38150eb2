#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "anchor_forge/corpus.hpp"
#include "anchor_forge/rng.hpp"

namespace anchor_forge {

/// Multiplicity-vector anchor (a_1, ..., a_d), indexed like LocalView::words.
struct Anchor {
  std::vector<int> counts;

  int length() const;
  bool operator==(const Anchor&) const = default;
  auto operator<=>(const Anchor&) const = default;
};

/// Throws InvalidArgument unless 0 <= a_j <= m_j for all j and length >= 1.
void validate_anchor(const LocalView& view, const Anchor& anchor);

Anchor full_anchor(const LocalView& view);

/// Distinct words with a_j > 0, in view order.
std::vector<std::string> anchor_words(const LocalView& view, const Anchor& anchor);
std::set<std::string> anchor_word_set(const LocalView& view, const Anchor& anchor);

/// Words in document order, with "xN" suffix when a_j > 1, e.g. "very x2 good".
std::string render_anchor(const LocalView& view, const Anchor& anchor);

/// Anchor as a set of kept token positions (0-based).
struct PositionalAnchor {
  std::set<std::size_t> kept_positions;
};

/// Counts kept occurrences per word of `view`. `view` must be the local view
/// of `example`.
Anchor to_multiplicity_anchor(const Document& example, const LocalView& view,
                              const PositionalAnchor& anchor);

/// Draws perturbed multiplicities M_j = a_j + Binomial(m_j - a_j, 1/2).
///
/// Bits are consumed from 64-bit words in view order; a word needing more
/// bits than remain in the current buffer starts a fresh one. The stream is
/// therefore a pure function of (view, anchor, rng state).
class BernoulliSampler {
 public:
  BernoulliSampler(const LocalView& view, const Anchor& anchor);

  void draw(SeededRng& rng, std::span<int> out) const;
  std::size_t size() const { return base_.size(); }

 private:
  std::vector<int> base_;
  std::vector<int> free_;
};

std::vector<int> sample_bernoulli(const LocalView& view, const Anchor& anchor, SeededRng& rng);

/// The literal copies / random selection / replacement scheme: for every
/// position outside the anchor draw B_k ~ Binomial(n, 1/2) and replace that
/// position by UNK in a uniformly random size-B_k subset of the n copies.
std::vector<Document> sample_three_step(const Document& example, const PositionalAnchor& anchor,
                                        std::size_t n, SeededRng& rng);

/// Exact law of a + Binomial(m - a, 1/2) on {a, ..., m}.
struct MultiplicityLaw {
  int first = 0;
  std::vector<double> mass;  // mass[k] = P(M = first + k)

  double pmf(int value) const;
  double mean() const;
  double variance() const;
};

MultiplicityLaw multiplicity_law(int m, int a);

/// C(n, k) / 2^n, exact to double rounding for n <= 62.
double binomial_half_pmf(int n, int k);

}  // namespace anchor_forge
