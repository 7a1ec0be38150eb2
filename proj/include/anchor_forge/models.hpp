#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "anchor_forge/corpus.hpp"
#include "anchor_forge/rng.hpp"
#include "anchor_forge/vectorize.hpp"

namespace anchor_forge {

/// A classifier specialised to one local view: evaluates perturbed
/// multiplicity vectors M (indexed like the view's words) without building
/// sparse vectors.
class BoundClassifier {
 public:
  virtual ~BoundClassifier() = default;

  virtual bool decide(std::span<const int> mult) const = 0;
  virtual double score(std::span<const int> mult) const = 0;

  /// View indices whose multiplicity can change the decision. Every other
  /// index is ignored by decide() and score().
  const std::vector<std::size_t>& dependent_indices() const { return dependent_; }

 protected:
  std::vector<std::size_t> dependent_;
};

/// Binary decision f(doc) = 1{g(phi(doc)) in R}, where phi is the
/// vectorizer the model declares.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual std::string kind() const = 0;
  virtual VectorizerKind vectorizer() const { return VectorizerKind::plain; }

  virtual double score(const TfidfVector& v) const = 0;
  virtual bool decide(const TfidfVector& v) const = 0;

  /// Words whose coordinate g reads.
  virtual std::set<std::string> dependency_set() const = 0;

  virtual bool differentiable() const { return false; }
  /// Partial derivatives of g with respect to each coordinate of `at`, keyed
  /// by word. Words of the model without a coordinate in `at` are included.
  virtual std::map<std::string, double> input_gradient(const TfidfVector& at) const;

  /// Generic binding builds the TF-IDF vector of each perturbed sample.
  virtual std::unique_ptr<BoundClassifier> bind(const LocalView& view) const;

  /// JSON text with sorted keys and a trailing newline.
  virtual std::string to_json() const = 0;
};

/// f = 1 iff every required word has a positive coordinate.
class PresenceRule final : public Classifier {
 public:
  explicit PresenceRule(std::set<std::string> required_words);

  const std::set<std::string>& required_words() const { return required_; }

  std::string kind() const override { return "presence_rule"; }
  double score(const TfidfVector& v) const override;
  bool decide(const TfidfVector& v) const override;
  std::set<std::string> dependency_set() const override { return required_; }
  std::unique_ptr<BoundClassifier> bind(const LocalView& view) const override;
  std::string to_json() const override;

 private:
  std::set<std::string> required_;
};

/// f = 1 iff (w1 and w2 present) or w3 present.
class SmallTree final : public Classifier {
 public:
  SmallTree(std::string w1, std::string w2, std::string w3);

  const std::string& word(int i) const { return words_.at(static_cast<std::size_t>(i)); }

  std::string kind() const override { return "small_tree"; }
  double score(const TfidfVector& v) const override;
  bool decide(const TfidfVector& v) const override;
  std::set<std::string> dependency_set() const override;
  std::unique_ptr<BoundClassifier> bind(const LocalView& view) const override;
  std::string to_json() const override;

 private:
  std::vector<std::string> words_;
};

/// Constant decision; every word is a dummy.
class ConstantClassifier final : public Classifier {
 public:
  explicit ConstantClassifier(bool value) : value_(value) {}

  std::string kind() const override { return "constant"; }
  double score(const TfidfVector&) const override { return value_ ? 1.0 : 0.0; }
  bool decide(const TfidfVector&) const override { return value_; }
  std::set<std::string> dependency_set() const override { return {}; }
  std::unique_ptr<BoundClassifier> bind(const LocalView& view) const override;
  std::string to_json() const override;

 private:
  bool value_;
};

enum class Link { none, logistic };

/// f = 1{lambda^T v + lambda0 > 0}. With the logistic link the score is
/// sigma(lambda^T v + lambda0) and the decision is unchanged.
class LinearClassifier final : public Classifier {
 public:
  LinearClassifier(std::map<std::string, double> coefficients, double intercept, Link link = Link::none,
                   VectorizerKind vectorizer = VectorizerKind::plain);

  const std::map<std::string, double>& coefficients() const { return coefficients_; }
  double coefficient(std::string_view word) const;
  double intercept() const { return intercept_; }
  Link link() const { return link_; }
  /// Same model with intercept lambda0 - shift.
  LinearClassifier shifted(double shift) const;

  std::string kind() const override { return "linear"; }
  VectorizerKind vectorizer() const override { return vectorizer_; }
  double margin(const TfidfVector& v) const;
  double score(const TfidfVector& v) const override;
  bool decide(const TfidfVector& v) const override;
  std::set<std::string> dependency_set() const override;
  bool differentiable() const override { return true; }
  /// Derivatives of the raw margin, i.e. the coefficients themselves.
  std::map<std::string, double> input_gradient(const TfidfVector& at) const override;
  std::unique_ptr<BoundClassifier> bind(const LocalView& view) const override;
  std::string to_json() const override;

 private:
  std::map<std::string, double> coefficients_;
  double intercept_;
  Link link_;
  VectorizerKind vectorizer_;
};

struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;  // row-major, outputs x inputs
  std::vector<double> bias;

  double& at(std::size_t out, std::size_t in) { return weights[out * inputs + in]; }
  double at(std::size_t out, std::size_t in) const { return weights[out * inputs + in]; }
};

/// Feed-forward network: tanh hidden layers, one sigmoid output unit.
/// score g(v) = sigma(z_out) and f = 1{g > 1/2}.
class TinyMlp final : public Classifier {
 public:
  TinyMlp(std::vector<std::string> vocabulary, std::vector<DenseLayer> layers,
          VectorizerKind vectorizer = VectorizerKind::plain);

  /// Random initialization, weights ~ N(0, 1/fan_in), zero biases.
  static TinyMlp initialize(std::vector<std::string> vocabulary, std::span<const std::size_t> hidden,
                            VectorizerKind vectorizer, SeededRng& rng);

  const std::vector<std::string>& vocabulary() const { return vocabulary_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }

  /// Dense input in vocabulary order.
  std::vector<double> dense_input(const TfidfVector& v) const;
  double forward(std::span<const double> input) const;
  /// Returns g and writes dg/dinput into `grad`.
  double forward_backward(std::span<const double> input, std::span<double> grad) const;

  std::string kind() const override { return "mlp"; }
  VectorizerKind vectorizer() const override { return vectorizer_; }
  double score(const TfidfVector& v) const override;
  bool decide(const TfidfVector& v) const override;
  std::set<std::string> dependency_set() const override;
  bool differentiable() const override { return true; }
  std::map<std::string, double> input_gradient(const TfidfVector& at) const override;
  std::unique_ptr<BoundClassifier> bind(const LocalView& view) const override;
  std::string to_json() const override;

 private:
  std::vector<std::string> vocabulary_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::vector<DenseLayer> layers_;
  VectorizerKind vectorizer_;
};

/// f(doc): vectorizes with the model's declared vectorizer, then decides.
bool decide(const Classifier& model, const Document& doc, const CorpusStats& stats);

std::unique_ptr<Classifier> load_model(std::string_view json_text);

/// Inline specs: "rule:w1,w2", "tree:w1,w2,w3", "const:0|1".
/// Returns nullptr when `spec` is not an inline spec.
std::unique_ptr<Classifier> parse_model_spec(std::string_view spec);

struct ModelTemplate {
  enum class Kind { linear, mlp } kind = Kind::linear;
  VectorizerKind vectorizer = VectorizerKind::plain;
  Link link = Link::logistic;
  std::vector<std::size_t> hidden = {16, 16};
};

struct TrainOptions {
  int epochs = 500;
  double learning_rate = 0.5;
  std::uint64_t seed = kDefaultSeed;
};

struct TrainResult {
  std::unique_ptr<Classifier> model;
  double train_accuracy = 0.0;
};

/// Full-batch gradient descent on the mean logistic loss. The feature set is
/// the sorted vocabulary of `stats`. Requires both labels to be present.
TrainResult train_tiny(const ModelTemplate& tmpl, std::span<const Document> documents, std::span<const int> labels,
                       const CorpusStats& stats, const TrainOptions& options);

}  // namespace anchor_forge
