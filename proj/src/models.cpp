#include "anchor_forge/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "anchor_forge/errors.hpp"

namespace anchor_forge {
namespace {

using nlohmann::json;

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

bool present(const TfidfVector& v, const std::string& word) { return v.at(word) > 0.0; }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

Link link_from_string(std::string_view name) {
  if (name == "none") return Link::none;
  if (name == "logistic") return Link::logistic;
  throw InvalidArgument("unknown link '" + std::string(name) + "'");
}

std::vector<std::string> split_commas(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (char c : text) {
    if (c == ',') {
      if (!current.empty()) out.push_back(current);
      current.clear();
    } else if (c != ' ') {
      current.push_back(c);
    }
  }
  if (!current.empty()) out.push_back(current);
  return out;
}

/// Fallback binding: rebuilds the sparse vector for every sample.
class GenericBound final : public BoundClassifier {
 public:
  GenericBound(const Classifier& model, const LocalView& view) : model_(model), view_(view) {
    const auto deps = model.dependency_set();
    bool any_dependency = false;
    for (std::size_t j = 0; j < view.size(); ++j) {
      if (view.idf[j] > 0.0 && deps.count(view.words[j])) any_dependency = true;
    }
    for (std::size_t j = 0; j < view.size(); ++j) {
      if (view.idf[j] <= 0.0) continue;
      const bool reads = model.vectorizer() == VectorizerKind::normalized ? any_dependency
                                                                          : deps.count(view.words[j]) > 0;
      if (reads) dependent_.push_back(j);
    }
  }

  bool decide(std::span<const int> mult) const override { return model_.decide(build(mult)); }
  double score(std::span<const int> mult) const override { return model_.score(build(mult)); }

 private:
  TfidfVector build(std::span<const int> mult) const {
    TfidfVector v;
    for (std::size_t j = 0; j < view_.size(); ++j) {
      const double value = mult[j] * view_.idf[j];
      if (value > 0.0) v.coords.emplace(view_.words[j], value);
    }
    if (model_.vectorizer() == VectorizerKind::normalized) {
      v.normalized = true;
      const double n = v.norm();
      if (n > 0.0) {
        for (auto& [w, value] : v.coords) value /= n;
      }
    }
    return v;
  }

  const Classifier& model_;
  LocalView view_;
};

class ConstantBound final : public BoundClassifier {
 public:
  explicit ConstantBound(bool value) : value_(value) {}
  bool decide(std::span<const int>) const override { return value_; }
  double score(std::span<const int>) const override { return value_ ? 1.0 : 0.0; }

 private:
  bool value_;
};

/// Conjunction / disjunction over presence of view indices.
class PresenceBound final : public BoundClassifier {
 public:
  // Decision: any clause fully present. A clause with a missing word is
  // never satisfied.
  explicit PresenceBound(std::vector<std::vector<std::size_t>> clauses, std::vector<std::size_t> dependent)
      : clauses_(std::move(clauses)) {
    dependent_ = std::move(dependent);
  }

  bool decide(std::span<const int> mult) const override {
    for (const auto& clause : clauses_) {
      bool all = true;
      for (std::size_t j : clause) {
        if (mult[j] <= 0) {
          all = false;
          break;
        }
      }
      if (all) return true;
    }
    return false;
  }
  double score(std::span<const int> mult) const override { return decide(mult) ? 1.0 : 0.0; }

 private:
  std::vector<std::vector<std::size_t>> clauses_;
};

/// Resolves a clause of words to view indices; nullopt when some word can
/// never be present in a perturbation of the view.
std::optional<std::vector<std::size_t>> resolve_clause(const LocalView& view, const std::vector<std::string>& words) {
  std::vector<std::size_t> idx;
  for (const auto& w : words) {
    auto j = view.index_of(w);
    if (!j || view.idf[*j] <= 0.0) return std::nullopt;
    idx.push_back(*j);
  }
  return idx;
}

class LinearBound final : public BoundClassifier {
 public:
  LinearBound(const LinearClassifier& model, const LocalView& view)
      : intercept_(model.intercept()),
        logistic_(model.link() == Link::logistic),
        normalized_(model.vectorizer() == VectorizerKind::normalized) {
    bool any = false;
    for (std::size_t j = 0; j < view.size(); ++j) {
      const double alpha = model.coefficient(view.words[j]) * view.idf[j];
      if (alpha != 0.0) {
        terms_.push_back({j, alpha});
        any = true;
      }
      if (view.idf[j] > 0.0) norm_terms_.push_back({j, view.idf[j] * view.idf[j]});
    }
    if (normalized_) {
      if (any) {
        for (const auto& [j, w] : norm_terms_) dependent_.push_back(j);
      }
    } else {
      for (const auto& [j, a] : terms_) dependent_.push_back(j);
    }
  }

  double margin(std::span<const int> mult) const {
    double dot = 0.0;
    for (const auto& [j, alpha] : terms_) dot += alpha * mult[j];
    if (normalized_) {
      double sq = 0.0;
      for (const auto& [j, idf2] : norm_terms_) sq += idf2 * mult[j] * mult[j];
      if (sq > 0.0) dot /= std::sqrt(sq);
    }
    return intercept_ + dot;
  }

  bool decide(std::span<const int> mult) const override { return margin(mult) > 0.0; }
  double score(std::span<const int> mult) const override {
    const double z = margin(mult);
    return logistic_ ? sigmoid(z) : z;
  }

 private:
  double intercept_;
  bool logistic_;
  bool normalized_;
  std::vector<std::pair<std::size_t, double>> terms_;
  std::vector<std::pair<std::size_t, double>> norm_terms_;
};

class MlpBound final : public BoundClassifier {
 public:
  MlpBound(const TinyMlp& model, const LocalView& view, const std::map<std::string, std::size_t, std::less<>>& index)
      : model_(model), normalized_(model.vectorizer() == VectorizerKind::normalized) {
    const DenseLayer& first = model.layers().front();
    bool any = false;
    for (std::size_t j = 0; j < view.size(); ++j) {
      if (view.idf[j] <= 0.0) continue;
      norm_terms_.push_back({j, view.idf[j] * view.idf[j]});
      auto it = index.find(view.words[j]);
      if (it == index.end()) continue;
      std::vector<double> column(first.outputs);
      bool nonzero = false;
      for (std::size_t o = 0; o < first.outputs; ++o) {
        column[o] = first.at(o, it->second);
        nonzero = nonzero || column[o] != 0.0;
      }
      if (!nonzero) continue;
      any = true;
      columns_.push_back({j, view.idf[j], std::move(column)});
    }
    if (normalized_) {
      if (any) {
        for (const auto& [j, w] : norm_terms_) dependent_.push_back(j);
      }
    } else {
      for (const auto& c : columns_) dependent_.push_back(c.index);
    }
  }

  double logit(std::span<const int> mult) const {
    const auto& layers = model_.layers();
    double scale = 1.0;
    if (normalized_) {
      double sq = 0.0;
      for (const auto& [j, idf2] : norm_terms_) sq += idf2 * mult[j] * mult[j];
      scale = sq > 0.0 ? 1.0 / std::sqrt(sq) : 0.0;
    }
    std::vector<double> act(layers.front().bias);
    for (const auto& c : columns_) {
      const double x = mult[c.index] * c.idf * scale;
      if (x == 0.0) continue;
      for (std::size_t o = 0; o < act.size(); ++o) act[o] += c.column[o] * x;
    }
    for (std::size_t l = 1; l < layers.size(); ++l) {
      for (double& a : act) a = std::tanh(a);
      const DenseLayer& layer = layers[l];
      std::vector<double> next(layer.bias);
      for (std::size_t o = 0; o < layer.outputs; ++o) {
        double s = next[o];
        for (std::size_t i = 0; i < layer.inputs; ++i) s += layer.at(o, i) * act[i];
        next[o] = s;
      }
      act = std::move(next);
    }
    return act.front();
  }

  bool decide(std::span<const int> mult) const override { return logit(mult) > 0.0; }
  double score(std::span<const int> mult) const override { return sigmoid(logit(mult)); }

 private:
  struct Column {
    std::size_t index;
    double idf;
    std::vector<double> column;
  };
  const TinyMlp& model_;
  bool normalized_;
  std::vector<Column> columns_;
  std::vector<std::pair<std::size_t, double>> norm_terms_;
};

}  // namespace

// ---------------------------------------------------------------- Classifier

std::map<std::string, double> Classifier::input_gradient(const TfidfVector&) const {
  throw NotDifferentiableError("model '" + kind() + "' does not expose an input gradient");
}

std::unique_ptr<BoundClassifier> Classifier::bind(const LocalView& view) const {
  return std::make_unique<GenericBound>(*this, view);
}

bool decide(const Classifier& model, const Document& doc, const CorpusStats& stats) {
  return model.decide(vectorize(doc, stats, model.vectorizer()));
}

// -------------------------------------------------------------- PresenceRule

PresenceRule::PresenceRule(std::set<std::string> required_words) : required_(std::move(required_words)) {
  if (required_.empty()) throw InvalidArgument("presence rule needs at least one required word");
}

bool PresenceRule::decide(const TfidfVector& v) const {
  return std::all_of(required_.begin(), required_.end(), [&](const std::string& w) { return present(v, w); });
}

double PresenceRule::score(const TfidfVector& v) const { return decide(v) ? 1.0 : 0.0; }

std::unique_ptr<BoundClassifier> PresenceRule::bind(const LocalView& view) const {
  auto clause = resolve_clause(view, {required_.begin(), required_.end()});
  if (!clause) return std::make_unique<ConstantBound>(false);
  std::vector<std::size_t> dependent = *clause;
  std::sort(dependent.begin(), dependent.end());
  return std::make_unique<PresenceBound>(std::vector<std::vector<std::size_t>>{*clause}, std::move(dependent));
}

std::string PresenceRule::to_json() const {
  json j;
  j["kind"] = kind();
  j["vectorizer"] = "plain";
  j["required_words"] = std::vector<std::string>(required_.begin(), required_.end());
  return dump(j);
}

// ----------------------------------------------------------------- SmallTree

SmallTree::SmallTree(std::string w1, std::string w2, std::string w3)
    : words_{std::move(w1), std::move(w2), std::move(w3)} {
  if (words_[0] == words_[1] || words_[0] == words_[2] || words_[1] == words_[2]) {
    throw InvalidArgument("small tree words must be distinct");
  }
}

bool SmallTree::decide(const TfidfVector& v) const {
  return (present(v, words_[0]) && present(v, words_[1])) || present(v, words_[2]);
}

double SmallTree::score(const TfidfVector& v) const { return decide(v) ? 1.0 : 0.0; }

std::set<std::string> SmallTree::dependency_set() const { return {words_.begin(), words_.end()}; }

std::unique_ptr<BoundClassifier> SmallTree::bind(const LocalView& view) const {
  std::vector<std::vector<std::size_t>> clauses;
  std::set<std::size_t> dependent;
  for (auto clause_words : {std::vector<std::string>{words_[0], words_[1]}, std::vector<std::string>{words_[2]}}) {
    if (auto clause = resolve_clause(view, clause_words)) {
      dependent.insert(clause->begin(), clause->end());
      clauses.push_back(std::move(*clause));
    }
  }
  if (clauses.empty()) return std::make_unique<ConstantBound>(false);
  return std::make_unique<PresenceBound>(std::move(clauses),
                                         std::vector<std::size_t>(dependent.begin(), dependent.end()));
}

std::string SmallTree::to_json() const {
  json j;
  j["kind"] = kind();
  j["vectorizer"] = "plain";
  j["words"] = words_;
  return dump(j);
}

// --------------------------------------------------------- ConstantClassifier

std::unique_ptr<BoundClassifier> ConstantClassifier::bind(const LocalView&) const {
  return std::make_unique<ConstantBound>(value_);
}

std::string ConstantClassifier::to_json() const {
  json j;
  j["kind"] = kind();
  j["value"] = value_ ? 1 : 0;
  j["vectorizer"] = "plain";
  return dump(j);
}

// ---------------------------------------------------------- LinearClassifier

LinearClassifier::LinearClassifier(std::map<std::string, double> coefficients, double intercept, Link link,
                                   VectorizerKind vectorizer)
    : coefficients_(std::move(coefficients)), intercept_(intercept), link_(link), vectorizer_(vectorizer) {
  if (!std::isfinite(intercept_)) throw InvalidArgument("linear model: non-finite intercept");
  for (const auto& [w, c] : coefficients_) {
    if (!std::isfinite(c)) throw InvalidArgument("linear model: non-finite coefficient for '" + w + "'");
  }
}

double LinearClassifier::coefficient(std::string_view word) const {
  auto it = coefficients_.find(std::string(word));
  return it == coefficients_.end() ? 0.0 : it->second;
}

LinearClassifier LinearClassifier::shifted(double shift) const {
  return LinearClassifier(coefficients_, intercept_ - shift, link_, vectorizer_);
}

double LinearClassifier::margin(const TfidfVector& v) const {
  double s = intercept_;
  for (const auto& [w, value] : v.coords) s += coefficient(w) * value;
  return s;
}

double LinearClassifier::score(const TfidfVector& v) const {
  const double z = margin(v);
  return link_ == Link::logistic ? sigmoid(z) : z;
}

bool LinearClassifier::decide(const TfidfVector& v) const { return margin(v) > 0.0; }

std::set<std::string> LinearClassifier::dependency_set() const {
  std::set<std::string> out;
  for (const auto& [w, c] : coefficients_) {
    if (c != 0.0) out.insert(w);
  }
  return out;
}

std::map<std::string, double> LinearClassifier::input_gradient(const TfidfVector& at) const {
  std::map<std::string, double> grad(coefficients_.begin(), coefficients_.end());
  for (const auto& [w, value] : at.coords) grad.emplace(w, 0.0);
  return grad;
}

std::unique_ptr<BoundClassifier> LinearClassifier::bind(const LocalView& view) const {
  return std::make_unique<LinearBound>(*this, view);
}

std::string LinearClassifier::to_json() const {
  json j;
  j["kind"] = kind();
  j["vectorizer"] = std::string(to_string(vectorizer_));
  j["link"] = link_ == Link::logistic ? "logistic" : "none";
  j["intercept"] = intercept_;
  json coef = json::object();
  for (const auto& [w, c] : coefficients_) coef[w] = c;
  j["coefficients"] = std::move(coef);
  return dump(j);
}

// ------------------------------------------------------------------- TinyMlp

TinyMlp::TinyMlp(std::vector<std::string> vocabulary, std::vector<DenseLayer> layers, VectorizerKind vectorizer)
    : vocabulary_(std::move(vocabulary)), layers_(std::move(layers)), vectorizer_(vectorizer) {
  if (layers_.empty()) throw InvalidArgument("mlp: at least one layer required");
  for (std::size_t i = 0; i < vocabulary_.size(); ++i) {
    if (!index_.emplace(vocabulary_[i], i).second) throw InvalidArgument("mlp: duplicate vocabulary word");
  }
  std::size_t expected = vocabulary_.size();
  for (const DenseLayer& layer : layers_) {
    if (layer.inputs != expected || layer.weights.size() != layer.inputs * layer.outputs ||
        layer.bias.size() != layer.outputs) {
      throw InvalidArgument("mlp: layer shapes are inconsistent");
    }
    expected = layer.outputs;
  }
  if (expected != 1) throw InvalidArgument("mlp: output layer must have exactly one unit");
}

TinyMlp TinyMlp::initialize(std::vector<std::string> vocabulary, std::span<const std::size_t> hidden,
                            VectorizerKind vectorizer, SeededRng& rng) {
  std::vector<std::size_t> sizes{vocabulary.size()};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(1);
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    DenseLayer layer;
    layer.inputs = sizes[l];
    layer.outputs = sizes[l + 1];
    layer.weights.resize(layer.inputs * layer.outputs);
    layer.bias.assign(layer.outputs, 0.0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(layer.inputs, 1)));
    for (double& w : layer.weights) w = rng.normal() * scale;
    layers.push_back(std::move(layer));
  }
  return TinyMlp(std::move(vocabulary), std::move(layers), vectorizer);
}

std::vector<double> TinyMlp::dense_input(const TfidfVector& v) const {
  std::vector<double> x(vocabulary_.size(), 0.0);
  for (const auto& [w, value] : v.coords) {
    auto it = index_.find(w);
    if (it != index_.end()) x[it->second] = value;
  }
  return x;
}

double TinyMlp::forward(std::span<const double> input) const {
  std::vector<double> act(input.begin(), input.end());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const DenseLayer& layer = layers_[l];
    std::vector<double> next(layer.bias);
    for (std::size_t o = 0; o < layer.outputs; ++o) {
      for (std::size_t i = 0; i < layer.inputs; ++i) next[o] += layer.at(o, i) * act[i];
    }
    if (l + 1 < layers_.size()) {
      for (double& a : next) a = std::tanh(a);
    }
    act = std::move(next);
  }
  return sigmoid(act.front());
}

double TinyMlp::forward_backward(std::span<const double> input, std::span<double> grad) const {
  std::vector<std::vector<double>> acts;  // post-activation outputs per layer
  acts.emplace_back(input.begin(), input.end());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const DenseLayer& layer = layers_[l];
    std::vector<double> next(layer.bias);
    for (std::size_t o = 0; o < layer.outputs; ++o) {
      for (std::size_t i = 0; i < layer.inputs; ++i) next[o] += layer.at(o, i) * acts.back()[i];
    }
    if (l + 1 < layers_.size()) {
      for (double& a : next) a = std::tanh(a);
    }
    acts.push_back(std::move(next));
  }
  const double g = sigmoid(acts.back().front());
  std::vector<double> delta{g * (1.0 - g)};  // dg/dz at the output
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const DenseLayer& layer = layers_[l];
    std::vector<double> prev(layer.inputs, 0.0);
    for (std::size_t o = 0; o < layer.outputs; ++o) {
      for (std::size_t i = 0; i < layer.inputs; ++i) prev[i] += layer.at(o, i) * delta[o];
    }
    if (l > 0) {
      for (std::size_t i = 0; i < prev.size(); ++i) {
        const double a = acts[l][i];
        prev[i] *= 1.0 - a * a;
      }
    }
    delta = std::move(prev);
  }
  std::copy(delta.begin(), delta.end(), grad.begin());
  return g;
}

double TinyMlp::score(const TfidfVector& v) const { return forward(dense_input(v)); }

bool TinyMlp::decide(const TfidfVector& v) const { return score(v) > 0.5; }

std::set<std::string> TinyMlp::dependency_set() const {
  std::set<std::string> out;
  const DenseLayer& first = layers_.front();
  for (std::size_t i = 0; i < vocabulary_.size(); ++i) {
    for (std::size_t o = 0; o < first.outputs; ++o) {
      if (first.at(o, i) != 0.0) {
        out.insert(vocabulary_[i]);
        break;
      }
    }
  }
  return out;
}

std::map<std::string, double> TinyMlp::input_gradient(const TfidfVector& at) const {
  const auto x = dense_input(at);
  std::vector<double> grad(x.size());
  forward_backward(x, grad);
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < vocabulary_.size(); ++i) out.emplace(vocabulary_[i], grad[i]);
  for (const auto& [w, value] : at.coords) out.emplace(w, 0.0);
  return out;
}

std::unique_ptr<BoundClassifier> TinyMlp::bind(const LocalView& view) const {
  return std::make_unique<MlpBound>(*this, view, index_);
}

std::string TinyMlp::to_json() const {
  json j;
  j["kind"] = kind();
  j["vectorizer"] = std::string(to_string(vectorizer_));
  j["activation"] = "tanh";
  j["vocabulary"] = vocabulary_;
  json layers = json::array();
  for (const DenseLayer& layer : layers_) {
    json rows = json::array();
    for (std::size_t o = 0; o < layer.outputs; ++o) {
      rows.push_back(std::vector<double>(layer.weights.begin() + static_cast<std::ptrdiff_t>(o * layer.inputs),
                                         layer.weights.begin() + static_cast<std::ptrdiff_t>((o + 1) * layer.inputs)));
    }
    layers.push_back({{"weights", rows}, {"bias", layer.bias}});
  }
  j["layers"] = std::move(layers);
  return dump(j);
}

// --------------------------------------------------------------- persistence

std::unique_ptr<Classifier> load_model(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("model: malformed JSON: ") + e.what());
  }
  try {
    const std::string kind = j.at("kind").get<std::string>();
    const VectorizerKind vec = vectorizer_from_string(j.value("vectorizer", std::string("plain")));
    if (kind == "presence_rule") {
      auto words = j.at("required_words").get<std::vector<std::string>>();
      return std::make_unique<PresenceRule>(std::set<std::string>(words.begin(), words.end()));
    }
    if (kind == "small_tree") {
      auto words = j.at("words").get<std::vector<std::string>>();
      if (words.size() != 3) throw InvalidArgument("small tree needs exactly three words");
      return std::make_unique<SmallTree>(words[0], words[1], words[2]);
    }
    if (kind == "constant") return std::make_unique<ConstantClassifier>(j.at("value").get<int>() != 0);
    if (kind == "linear") {
      auto coef = j.at("coefficients").get<std::map<std::string, double>>();
      return std::make_unique<LinearClassifier>(std::move(coef), j.at("intercept").get<double>(),
                                                link_from_string(j.value("link", std::string("none"))), vec);
    }
    if (kind == "mlp") {
      auto vocab = j.at("vocabulary").get<std::vector<std::string>>();
      std::vector<DenseLayer> layers;
      for (const auto& lj : j.at("layers")) {
        DenseLayer layer;
        auto rows = lj.at("weights").get<std::vector<std::vector<double>>>();
        layer.bias = lj.at("bias").get<std::vector<double>>();
        layer.outputs = rows.size();
        layer.inputs = rows.empty() ? 0 : rows.front().size();
        for (const auto& row : rows) {
          if (row.size() != layer.inputs) throw InvalidArgument("mlp: ragged weight matrix");
          layer.weights.insert(layer.weights.end(), row.begin(), row.end());
        }
        layers.push_back(std::move(layer));
      }
      return std::make_unique<TinyMlp>(std::move(vocab), std::move(layers), vec);
    }
    throw InvalidArgument("unknown model kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("model: ") + e.what());
  }
}

std::unique_ptr<Classifier> parse_model_spec(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) return nullptr;
  const std::string_view head = spec.substr(0, colon);
  const auto words = split_commas(spec.substr(colon + 1));
  if (head == "rule") return std::make_unique<PresenceRule>(std::set<std::string>(words.begin(), words.end()));
  if (head == "tree") {
    if (words.size() != 3) throw InvalidArgument("tree spec needs three words");
    return std::make_unique<SmallTree>(words[0], words[1], words[2]);
  }
  if (head == "const") {
    if (words.size() != 1 || (words[0] != "0" && words[0] != "1")) throw InvalidArgument("const spec is 0 or 1");
    return std::make_unique<ConstantClassifier>(words[0] == "1");
  }
  return nullptr;
}

// ------------------------------------------------------------------ training

namespace {

struct SparseRow {
  std::vector<std::pair<std::size_t, double>> entries;
};

std::vector<SparseRow> build_rows(std::span<const Document> documents, const CorpusStats& stats,
                                  VectorizerKind vec, const std::map<std::string, std::size_t, std::less<>>& index) {
  std::vector<SparseRow> rows;
  rows.reserve(documents.size());
  for (const Document& doc : documents) {
    SparseRow row;
    for (const auto& [w, value] : vectorize(doc, stats, vec).coords) {
      auto it = index.find(w);
      if (it != index.end()) row.entries.push_back({it->second, value});
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

double accuracy(const std::vector<double>& logits, std::span<const int> labels) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if ((logits[i] > 0.0) == (labels[i] == 1)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(logits.size());
}

TrainResult train_linear(std::vector<std::string> vocab, const std::vector<SparseRow>& rows, std::span<const int> labels,
                         const ModelTemplate& tmpl, const TrainOptions& options) {
  const std::size_t n = rows.size();
  std::vector<double> w(vocab.size(), 0.0);
  double b = 0.0;
  std::vector<double> logits(n, 0.0);
  auto compute_logits = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      double z = b;
      for (const auto& [f, x] : rows[i].entries) z += w[f] * x;
      logits[i] = z;
    }
  };
  compute_logits();
  std::vector<double> gw(w.size());
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::fill(gw.begin(), gw.end(), 0.0);
    double gb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = sigmoid(logits[i]) - labels[i];
      gb += r;
      for (const auto& [f, x] : rows[i].entries) gw[f] += r * x;
    }
    const double step = options.learning_rate / static_cast<double>(n);
    for (std::size_t f = 0; f < w.size(); ++f) w[f] -= step * gw[f];
    b -= step * gb;
    compute_logits();
  }
  std::map<std::string, double> coef;
  for (std::size_t f = 0; f < vocab.size(); ++f) coef.emplace(vocab[f], w[f]);
  TrainResult result;
  result.train_accuracy = accuracy(logits, labels);
  result.model = std::make_unique<LinearClassifier>(std::move(coef), b, tmpl.link, tmpl.vectorizer);
  return result;
}

TrainResult train_mlp(std::vector<std::string> vocab, const std::vector<SparseRow>& rows, std::span<const int> labels,
                      const ModelTemplate& tmpl, const TrainOptions& options) {
  SeededRng rng(options.seed);
  TinyMlp model = TinyMlp::initialize(std::move(vocab), tmpl.hidden, tmpl.vectorizer, rng);
  auto& layers = model.mutable_layers();
  const std::size_t n = rows.size();
  const std::size_t depth = layers.size();

  std::vector<DenseLayer> grads = layers;
  std::vector<std::vector<double>> acts(depth + 1);
  std::vector<double> logits(n, 0.0);

  // Forward pass for one row; acts[l] holds the input of layer l and
  // acts[depth] the output logit.
  auto forward_row = [&](const SparseRow& row) {
    const DenseLayer& first = layers.front();
    acts[1] = first.bias;
    for (const auto& [f, x] : row.entries) {
      for (std::size_t o = 0; o < first.outputs; ++o) acts[1][o] += first.at(o, f) * x;
    }
    for (std::size_t l = 1; l < depth; ++l) {
      for (double& a : acts[l]) a = std::tanh(a);
      const DenseLayer& layer = layers[l];
      acts[l + 1] = layer.bias;
      for (std::size_t o = 0; o < layer.outputs; ++o) {
        double s = acts[l + 1][o];
        for (std::size_t i = 0; i < layer.inputs; ++i) s += layer.at(o, i) * acts[l][i];
        acts[l + 1][o] = s;
      }
    }
    return acts[depth].front();
  };

  for (std::size_t i = 0; i < n; ++i) logits[i] = forward_row(rows[i]);
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    for (auto& g : grads) {
      std::fill(g.weights.begin(), g.weights.end(), 0.0);
      std::fill(g.bias.begin(), g.bias.end(), 0.0);
    }
    for (std::size_t i = 0; i < n; ++i) {
      forward_row(rows[i]);
      std::vector<double> delta{sigmoid(acts[depth].front()) - labels[i]};
      for (std::size_t l = depth; l-- > 0;) {
        const DenseLayer& layer = layers[l];
        DenseLayer& g = grads[l];
        for (std::size_t o = 0; o < layer.outputs; ++o) g.bias[o] += delta[o];
        if (l == 0) {
          for (const auto& [f, x] : rows[i].entries) {
            for (std::size_t o = 0; o < layer.outputs; ++o) g.at(o, f) += delta[o] * x;
          }
          break;
        }
        std::vector<double> prev(layer.inputs, 0.0);
        for (std::size_t o = 0; o < layer.outputs; ++o) {
          for (std::size_t in = 0; in < layer.inputs; ++in) {
            g.at(o, in) += delta[o] * acts[l][in];
            prev[in] += layer.at(o, in) * delta[o];
          }
        }
        for (std::size_t in = 0; in < prev.size(); ++in) prev[in] *= 1.0 - acts[l][in] * acts[l][in];
        delta = std::move(prev);
      }
    }
    const double step = options.learning_rate / static_cast<double>(n);
    for (std::size_t l = 0; l < depth; ++l) {
      for (std::size_t k = 0; k < layers[l].weights.size(); ++k) layers[l].weights[k] -= step * grads[l].weights[k];
      for (std::size_t k = 0; k < layers[l].bias.size(); ++k) layers[l].bias[k] -= step * grads[l].bias[k];
    }
  }
  for (std::size_t i = 0; i < n; ++i) logits[i] = forward_row(rows[i]);
  TrainResult result;
  result.train_accuracy = accuracy(logits, labels);
  result.model = std::make_unique<TinyMlp>(std::move(model));
  return result;
}

}  // namespace

TrainResult train_tiny(const ModelTemplate& tmpl, std::span<const Document> documents, std::span<const int> labels,
                       const CorpusStats& stats, const TrainOptions& options) {
  if (documents.size() != labels.size()) throw InvalidArgument("train: documents and labels differ in size");
  if (documents.empty()) throw InvalidArgument("train: empty training set");
  const bool has_pos = std::any_of(labels.begin(), labels.end(), [](int y) { return y == 1; });
  const bool has_neg = std::any_of(labels.begin(), labels.end(), [](int y) { return y == 0; });
  if (!has_pos || !has_neg) throw InvalidArgument("train: both classes must be present");
  if (options.epochs < 0) throw InvalidArgument("train: negative epoch count");

  std::vector<std::string> vocab;
  std::map<std::string, std::size_t, std::less<>> index;
  for (const auto& [word, count] : stats.doc_freq()) {
    index.emplace(word, vocab.size());
    vocab.push_back(word);
  }
  const auto rows = build_rows(documents, stats, tmpl.vectorizer, index);
  if (tmpl.kind == ModelTemplate::Kind::linear) return train_linear(std::move(vocab), rows, labels, tmpl, options);
  return train_mlp(std::move(vocab), rows, labels, tmpl, options);
}

}  // namespace anchor_forge
