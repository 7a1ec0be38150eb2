#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace anchor_forge {

/// Replacement token used by the perturbation scheme. Tokenization lowercases
/// everything, so a fitted vocabulary can never contain it.
inline constexpr std::string_view kUnkToken = "UNK";

/// An ordered sequence of lowercase tokens.
struct Document {
  std::vector<std::string> tokens;

  std::size_t length() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  bool operator==(const Document&) const = default;
};

/// Lowercases ASCII letters and splits on every maximal run of characters
/// that are not ASCII alphanumerics. Bytes >= 0x80 are kept inside words so
/// that UTF-8 text is not cut mid-character.
Document tokenize(std::string_view raw_text);

/// Document frequencies fitted on a corpus.
class CorpusStats {
 public:
  using FrequencyMap = std::map<std::string, std::size_t, std::less<>>;

  CorpusStats(std::size_t n_docs, FrequencyMap doc_freq);

  std::size_t n_docs() const { return n_docs_; }
  const FrequencyMap& doc_freq() const { return doc_freq_; }
  bool contains(std::string_view word) const;
  /// Number of documents containing `word`, 0 when out of vocabulary.
  std::size_t document_frequency(std::string_view word) const;
  /// ln((N + 1) / (N_j + 1)) + 1 for in-vocabulary words, 0 otherwise.
  /// The UNK token always maps to 0.
  double idf(std::string_view word) const;

  /// Serialized as {"doc_freq": {...}, "n_docs": N}, sorted keys.
  std::string to_json() const;
  static CorpusStats from_json(std::string_view text);

  bool operator==(const CorpusStats&) const = default;

 private:
  std::size_t n_docs_;
  std::map<std::string, std::size_t, std::less<>> doc_freq_;
};

CorpusStats fit_corpus(std::span<const Document> documents);

/// Fraction of `corpus` documents containing every word of `anchor_words`.
double coverage(const std::set<std::string>& anchor_words, std::span<const Document> corpus);

/// The example restricted to its own distinct words.
struct LocalView {
  std::vector<std::string> words;  // first-occurrence order
  std::vector<int> mult;
  std::vector<double> idf;

  std::size_t size() const { return words.size(); }
  int length() const;
  /// Index of `word` in `words`, or nullopt.
  std::optional<std::size_t> index_of(std::string_view word) const;
};

LocalView local_view(const Document& example, const CorpusStats& stats);

/// Builds a view from explicit columns. Validates distinct words, positive
/// multiplicities and non-negative idf values.
LocalView make_view(std::vector<std::string> words, std::vector<int> mult, std::vector<double> idf);

/// Caps every multiplicity at `cap` (cap >= 1).
LocalView cap_multiplicities(const LocalView& view, int cap);

/// Expands a view back into a document (words repeated in view order).
Document expand(const LocalView& view);

/// A corpus read from disk; `labels` is filled for CSV input only.
struct LabeledCorpus {
  std::vector<Document> documents;
  std::vector<std::string> raw_texts;
  std::vector<int> labels;
  bool has_labels() const { return !labels.empty(); }
};

/// Reads one document per line, or a CSV file with a `text,label` header.
/// CSV is detected by the `.csv` extension.
LabeledCorpus read_corpus(const std::filesystem::path& path);

/// Parses RFC 4180 style CSV content into rows of fields.
std::vector<std::vector<std::string>> parse_csv(std::string_view content);

}  // namespace anchor_forge
