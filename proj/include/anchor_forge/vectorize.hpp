#pragma once

#include <map>
#include <string>
#include <string_view>

#include "anchor_forge/corpus.hpp"

namespace anchor_forge {

enum class VectorizerKind { plain, normalized };

std::string_view to_string(VectorizerKind kind);
VectorizerKind vectorizer_from_string(std::string_view name);

/// Sparse TF-IDF vector; absent words are zero.
struct TfidfVector {
  std::map<std::string, double, std::less<>> coords;
  bool normalized = false;

  double at(std::string_view word) const;
  double norm() const;
  bool operator==(const TfidfVector&) const = default;
};

/// coords[w] = multiplicity(w) * idf(w); out-of-vocabulary words are omitted.
TfidfVector tfidf(const Document& doc, const CorpusStats& stats);

/// tfidf(doc) divided by its Euclidean norm; the zero vector maps to itself.
TfidfVector tfidf_normalized(const Document& doc, const CorpusStats& stats);

TfidfVector vectorize(const Document& doc, const CorpusStats& stats, VectorizerKind kind);

}  // namespace anchor_forge
