#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "anchor_forge/corpus.hpp"
#include "anchor_forge/errors.hpp"

using namespace anchor_forge;

namespace {
std::vector<Document> docs(std::initializer_list<std::vector<std::string>> rows) {
  std::vector<Document> out;
  for (const auto& r : rows) out.push_back(Document{r});
  return out;
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << content;
  return path;
}
}  // namespace

TEST_CASE("tokenize lowercases and splits on punctuation") {
  CHECK(tokenize("Food is very good!").tokens == std::vector<std::string>{"food", "is", "very", "good"});
  CHECK(tokenize("").empty());
  const auto fox = tokenize("The quick brown fox jumps over the lazy dog");
  CHECK(fox.length() == 9);
  CHECK(std::count(fox.tokens.begin(), fox.tokens.end(), "the") == 2);
  CHECK(tokenize("a--b  c3").tokens == std::vector<std::string>{"a", "b", "c3"});
}

TEST_CASE("tokenize keeps non-ASCII bytes inside words") {
  CHECK(tokenize("caf\xc3\xa9 ok").tokens == std::vector<std::string>{"caf\xc3\xa9", "ok"});
}

TEST_CASE("document frequencies count documents, not occurrences") {
  const auto s = fit_corpus(docs({{"a", "b"}, {"a"}, {"c", "a"}}));
  CHECK(s.n_docs() == 3);
  CHECK(s.document_frequency("a") == 3);
  CHECK(s.document_frequency("b") == 1);
  CHECK(s.document_frequency("c") == 1);
  CHECK(s.document_frequency("zzz") == 0);

  const auto single = fit_corpus(docs({{"a", "a", "a"}}));
  CHECK(single.n_docs() == 1);
  CHECK(single.document_frequency("a") == 1);
}

TEST_CASE("idf values") {
  CorpusStats s(1000, {{"rare", 1}, {"everywhere", 1000}});
  CHECK(s.idf("rare") == doctest::Approx(std::log(1001.0 / 2.0) + 1.0).epsilon(1e-12));
  CHECK(s.idf("rare") == doctest::Approx(7.216).epsilon(1e-3));
  CHECK(s.idf("everywhere") == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s.idf("missing") == 0.0);
  CHECK(s.idf(kUnkToken) == 0.0);
}

TEST_CASE("a fitted vocabulary never contains the UNK token") {
  const auto s = fit_corpus(std::vector<Document>{tokenize("UNK unk Unk")});
  CHECK_FALSE(s.contains(kUnkToken));
  CHECK(s.idf(kUnkToken) == 0.0);
}

TEST_CASE("coverage") {
  const auto corpus = docs({{"a", "b"}, {"a"}, {"c"}});
  CHECK(coverage({"a"}, corpus) == doctest::Approx(2.0 / 3.0));
  CHECK(coverage({"a", "b"}, corpus) == doctest::Approx(1.0 / 3.0));
  CHECK(coverage({"x"}, docs({{"x"}, {"x", "y"}})) == 1.0);
}

TEST_CASE("stats JSON round trip") {
  const auto s = fit_corpus(docs({{"b", "a"}, {"a"}}));
  const std::string text = s.to_json();
  CHECK(text == "{\n  \"doc_freq\": {\n    \"a\": 2,\n    \"b\": 1\n  },\n  \"n_docs\": 2\n}\n");
  CHECK(CorpusStats::from_json(text) == s);
  CHECK_THROWS_AS(CorpusStats::from_json("{\"n_docs\": 1}"), InvalidArgument);
}

TEST_CASE("local view keeps first-occurrence order and counts") {
  const auto s = fit_corpus(docs({{"good", "food"}, {"very"}}));
  const auto v = local_view(tokenize("very good very unseen"), s);
  CHECK(v.words == std::vector<std::string>{"very", "good", "unseen"});
  CHECK(v.mult == std::vector<int>{2, 1, 1});
  CHECK(v.length() == 4);
  CHECK(v.idf[2] == 0.0);
  CHECK(v.idf[0] == doctest::Approx(std::log(3.0 / 2.0) + 1.0));
  CHECK(v.index_of("good") == std::optional<std::size_t>{1});
  CHECK_FALSE(v.index_of("bad").has_value());
  CHECK_THROWS_AS(local_view(Document{}, s), EmptyDocumentError);
}

TEST_CASE("make_view validation and multiplicity cap") {
  CHECK_THROWS_AS(make_view({"a", "a"}, {1, 1}, {1.0, 1.0}), InvalidArgument);
  CHECK_THROWS_AS(make_view({"a"}, {0}, {1.0}), InvalidArgument);
  CHECK_THROWS_AS(make_view({"a"}, {1}, {-1.0}), InvalidArgument);
  const auto v = make_view({"a", "b"}, {5, 2}, {1.0, 2.0});
  const auto c = cap_multiplicities(v, 3);
  CHECK(c.mult == std::vector<int>{3, 2});
  CHECK(expand(c).tokens == std::vector<std::string>{"a", "a", "a", "b", "b"});
  CHECK_THROWS_AS(cap_multiplicities(v, 0), InvalidArgument);
}

TEST_CASE("reading plain and CSV corpora gives the same stats") {
  const auto plain = temp_file("af_corpus.txt", "good food\nbad food\nvery good\n");
  const auto csv = temp_file("af_corpus.csv", "text,label\ngood food,1\n\"bad food\",0\nvery good,1\n");
  const auto a = read_corpus(plain);
  const auto b = read_corpus(csv);
  CHECK(a.documents.size() == 3);
  CHECK_FALSE(a.has_labels());
  CHECK(b.labels == std::vector<int>{1, 0, 1});
  CHECK(fit_corpus(a.documents) == fit_corpus(b.documents));
  CHECK(fit_corpus(a.documents).n_docs() == 3);
}

TEST_CASE("CSV parsing handles quotes and embedded commas") {
  const auto rows = parse_csv("text,label\n\"a, \"\"b\"\"\",1\n");
  REQUIRE(rows.size() == 2);
  CHECK(rows[1][0] == "a, \"b\"");
  CHECK(rows[1][1] == "1");
}
