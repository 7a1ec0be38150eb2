#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "anchor_forge/errors.hpp"
#include "anchor_forge/vectorize.hpp"

using namespace anchor_forge;

namespace {
CorpusStats small_stats() {
  return CorpusStats(10, {{"a", 1}, {"b", 1}, {"c", 10}});
}
}  // namespace

TEST_CASE("empty document maps to the zero vector") {
  const auto s = small_stats();
  CHECK(tfidf(Document{}, s).coords.empty());
  CHECK(tfidf_normalized(Document{}, s).coords.empty());
  CHECK(tfidf_normalized(Document{}, s).norm() == 0.0);
}

TEST_CASE("coordinate is multiplicity times idf") {
  const auto s = small_stats();
  const auto v = tfidf(tokenize("a a c"), s);
  CHECK(v.at("a") == doctest::Approx(2.0 * s.idf("a")));
  CHECK(v.at("c") == doctest::Approx(s.idf("c")));
  CHECK(v.at("b") == 0.0);
}

TEST_CASE("out-of-vocabulary and UNK tokens contribute nothing") {
  const auto s = small_stats();
  const auto v = tfidf(Document{{"a", "UNK", "zzz"}}, s);
  CHECK(v.coords.size() == 1);
  CHECK(v == tfidf(Document{{"a"}}, s));
}

TEST_CASE("normalized vector") {
  const auto s = small_stats();
  for (int k = 1; k <= 5; ++k) {
    Document d{std::vector<std::string>(static_cast<std::size_t>(k), "a")};
    CHECK(tfidf_normalized(d, s).at("a") == doctest::Approx(1.0));
  }
  const auto v = tfidf_normalized(tokenize("a b"), s);
  CHECK(v.at("a") == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(v.at("b") == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(v.norm() == doctest::Approx(1.0));
  CHECK(v.normalized);
}

TEST_CASE("vectorizer names") {
  CHECK(vectorizer_from_string("plain") == VectorizerKind::plain);
  CHECK(vectorizer_from_string("normalized") == VectorizerKind::normalized);
  CHECK(to_string(VectorizerKind::normalized) == "normalized");
  CHECK_THROWS_AS(vectorizer_from_string("l1"), InvalidArgument);
}
