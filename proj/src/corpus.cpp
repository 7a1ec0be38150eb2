#include "anchor_forge/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "anchor_forge/errors.hpp"

namespace anchor_forge {
namespace {

bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

char lower(unsigned char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
}

std::string trim_line_end(std::string line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
  return line;
}

}  // namespace

Document tokenize(std::string_view raw_text) {
  Document doc;
  std::string current;
  for (char ch : raw_text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_word_byte(c)) {
      current.push_back(lower(c));
    } else if (!current.empty()) {
      doc.tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) doc.tokens.push_back(std::move(current));
  return doc;
}

CorpusStats::CorpusStats(std::size_t n_docs, FrequencyMap doc_freq)
    : n_docs_(n_docs), doc_freq_(std::move(doc_freq)) {
  if (n_docs_ == 0) throw InvalidArgument("corpus stats: n_docs must be positive");
  for (const auto& [word, count] : doc_freq_) {
    if (count == 0 || count > n_docs_) {
      throw InvalidArgument("corpus stats: document frequency of '" + word + "' outside [1, N]");
    }
  }
}

bool CorpusStats::contains(std::string_view word) const {
  return word != kUnkToken && doc_freq_.find(word) != doc_freq_.end();
}

std::size_t CorpusStats::document_frequency(std::string_view word) const {
  if (word == kUnkToken) return 0;
  auto it = doc_freq_.find(word);
  return it == doc_freq_.end() ? 0 : it->second;
}

double CorpusStats::idf(std::string_view word) const {
  const std::size_t nj = document_frequency(word);
  if (nj == 0) return 0.0;
  return std::log(static_cast<double>(n_docs_ + 1) / static_cast<double>(nj + 1)) + 1.0;
}

std::string CorpusStats::to_json() const {
  nlohmann::json j;
  j["n_docs"] = n_docs_;
  nlohmann::json freq = nlohmann::json::object();
  for (const auto& [word, count] : doc_freq_) freq[word] = count;
  j["doc_freq"] = std::move(freq);
  return j.dump(2) + "\n";
}

CorpusStats CorpusStats::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(std::string("corpus stats: malformed JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("n_docs") || !j.contains("doc_freq")) {
    throw InvalidArgument("corpus stats: expected fields 'n_docs' and 'doc_freq'");
  }
  FrequencyMap freq;
  for (const auto& [word, count] : j.at("doc_freq").items()) {
    freq.emplace(word, count.get<std::size_t>());
  }
  return CorpusStats(j.at("n_docs").get<std::size_t>(), std::move(freq));
}

CorpusStats fit_corpus(std::span<const Document> documents) {
  if (documents.empty()) throw InvalidArgument("fit_corpus: empty corpus");
  CorpusStats::FrequencyMap freq;
  for (const Document& doc : documents) {
    std::unordered_set<std::string_view> seen;
    for (const std::string& token : doc.tokens) {
      if (token == kUnkToken) continue;
      if (seen.insert(token).second) ++freq[token];
    }
  }
  return CorpusStats(documents.size(), std::move(freq));
}

double coverage(const std::set<std::string>& anchor_words, std::span<const Document> corpus) {
  if (anchor_words.empty()) throw InvalidArgument("coverage: anchor word set is empty");
  if (corpus.empty()) throw InvalidArgument("coverage: empty corpus");
  std::size_t hits = 0;
  for (const Document& doc : corpus) {
    std::unordered_set<std::string_view> present(doc.tokens.begin(), doc.tokens.end());
    const bool all = std::all_of(anchor_words.begin(), anchor_words.end(),
                                 [&](const std::string& w) { return present.count(w) > 0; });
    if (all) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(corpus.size());
}

int LocalView::length() const {
  int total = 0;
  for (int m : mult) total += m;
  return total;
}

std::optional<std::size_t> LocalView::index_of(std::string_view word) const {
  for (std::size_t j = 0; j < words.size(); ++j) {
    if (words[j] == word) return j;
  }
  return std::nullopt;
}

LocalView local_view(const Document& example, const CorpusStats& stats) {
  if (example.empty()) throw EmptyDocumentError("cannot explain an empty document");
  LocalView view;
  std::unordered_map<std::string_view, std::size_t> slot;
  for (const std::string& token : example.tokens) {
    auto [it, inserted] = slot.emplace(token, view.words.size());
    if (inserted) {
      view.words.push_back(token);
      view.mult.push_back(1);
      view.idf.push_back(stats.idf(token));
    } else {
      ++view.mult[it->second];
    }
  }
  return view;
}

LocalView make_view(std::vector<std::string> words, std::vector<int> mult, std::vector<double> idf) {
  if (words.size() != mult.size() || words.size() != idf.size()) {
    throw InvalidArgument("make_view: column sizes differ");
  }
  if (words.empty()) throw EmptyDocumentError("make_view: no words");
  std::unordered_set<std::string> seen;
  for (std::size_t j = 0; j < words.size(); ++j) {
    if (!seen.insert(words[j]).second) throw InvalidArgument("make_view: duplicate word '" + words[j] + "'");
    if (mult[j] < 1) throw InvalidArgument("make_view: multiplicities must be >= 1");
    if (!(idf[j] >= 0.0)) throw InvalidArgument("make_view: idf must be >= 0");
  }
  return LocalView{std::move(words), std::move(mult), std::move(idf)};
}

LocalView cap_multiplicities(const LocalView& view, int cap) {
  if (cap < 1) throw InvalidArgument("cap_multiplicities: cap must be >= 1");
  LocalView capped = view;
  for (int& m : capped.mult) m = std::min(m, cap);
  return capped;
}

Document expand(const LocalView& view) {
  Document doc;
  for (std::size_t j = 0; j < view.size(); ++j) {
    for (int k = 0; k < view.mult[j]; ++k) doc.tokens.push_back(view.words[j]);
  }
  return doc;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view content) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  for (std::size_t i = 0; i < content.size(); ++i) {
    const char c = content[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        field_started = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r':
        break;
      case '\n':
        if (field_started || !field.empty() || !row.empty()) {
          row.push_back(std::move(field));
          rows.push_back(std::move(row));
        }
        field.clear();
        row.clear();
        field_started = false;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (quoted) throw InvalidArgument("csv: unterminated quoted field");
  if (field_started || !field.empty() || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

LabeledCorpus read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read corpus file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string content = buffer.str();

  LabeledCorpus corpus;
  if (path.extension() == ".csv") {
    auto rows = parse_csv(content);
    if (rows.empty()) throw InvalidArgument("csv corpus: missing header");
    const auto& header = rows.front();
    if (header.size() != 2 || header[0] != "text" || header[1] != "label") {
      throw InvalidArgument("csv corpus: header must be 'text,label'");
    }
    for (std::size_t r = 1; r < rows.size(); ++r) {
      if (rows[r].size() != 2) {
        throw InvalidArgument("csv corpus: row " + std::to_string(r + 1) + " does not have two fields");
      }
      int label = 0;
      try {
        std::size_t used = 0;
        label = std::stoi(rows[r][1], &used);
        if (used != rows[r][1].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw InvalidArgument("csv corpus: row " + std::to_string(r + 1) + " has a non-integer label");
      }
      if (label != 0 && label != 1) {
        throw InvalidArgument("csv corpus: labels must be 0 or 1");
      }
      corpus.raw_texts.push_back(rows[r][0]);
      corpus.documents.push_back(tokenize(rows[r][0]));
      corpus.labels.push_back(label);
    }
  } else {
    std::istringstream lines(content);
    std::string line;
    while (std::getline(lines, line)) {
      line = trim_line_end(std::move(line));
      corpus.raw_texts.push_back(line);
      corpus.documents.push_back(tokenize(line));
    }
  }
  if (corpus.documents.empty()) throw InvalidArgument("corpus file '" + path.string() + "' has no documents");
  return corpus;
}

}  // namespace anchor_forge
