#include "anchor_forge/vectorize.hpp"

#include <cmath>

#include "anchor_forge/errors.hpp"

namespace anchor_forge {

std::string_view to_string(VectorizerKind kind) {
  return kind == VectorizerKind::plain ? "plain" : "normalized";
}

VectorizerKind vectorizer_from_string(std::string_view name) {
  if (name == "plain") return VectorizerKind::plain;
  if (name == "normalized") return VectorizerKind::normalized;
  throw InvalidArgument("unknown vectorizer '" + std::string(name) + "'");
}

double TfidfVector::at(std::string_view word) const {
  auto it = coords.find(word);
  return it == coords.end() ? 0.0 : it->second;
}

double TfidfVector::norm() const {
  double sum = 0.0;
  for (const auto& [word, value] : coords) sum += value * value;
  return std::sqrt(sum);
}

TfidfVector tfidf(const Document& doc, const CorpusStats& stats) {
  std::map<std::string, int, std::less<>> counts;
  for (const std::string& token : doc.tokens) ++counts[token];
  TfidfVector vec;
  for (const auto& [word, count] : counts) {
    const double idf = stats.idf(word);
    if (idf > 0.0) vec.coords.emplace(word, count * idf);
  }
  return vec;
}

TfidfVector tfidf_normalized(const Document& doc, const CorpusStats& stats) {
  TfidfVector vec = tfidf(doc, stats);
  vec.normalized = true;
  const double n = vec.norm();
  if (n > 0.0) {
    for (auto& [word, value] : vec.coords) value /= n;
  }
  return vec;
}

TfidfVector vectorize(const Document& doc, const CorpusStats& stats, VectorizerKind kind) {
  return kind == VectorizerKind::plain ? tfidf(doc, stats) : tfidf_normalized(doc, stats);
}

}  // namespace anchor_forge
