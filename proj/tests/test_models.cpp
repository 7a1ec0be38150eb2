#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "anchor_forge/errors.hpp"
#include "anchor_forge/models.hpp"

using namespace anchor_forge;

namespace {
CorpusStats food_stats() {
  return fit_corpus(std::vector<Document>{tokenize("food is very good"), tokenize("service was bad"),
                                          tokenize("good food"), tokenize("very slow")});
}
}  // namespace

TEST_CASE("presence rule decisions") {
  const auto s = food_stats();
  const PresenceRule rule({"very", "good"});
  CHECK(decide(rule, tokenize("food is very good"), s));
  CHECK_FALSE(decide(rule, tokenize("food is good"), s));
  CHECK(rule.dependency_set() == std::set<std::string>{"good", "very"});
}

TEST_CASE("small tree decides on w3 or on w1 and w2") {
  const auto s = fit_corpus(std::vector<Document>{tokenize("x y z"), tokenize("q")});
  const SmallTree tree("x", "y", "z");
  CHECK(decide(tree, tokenize("z"), s));
  CHECK(decide(tree, tokenize("x y"), s));
  CHECK_FALSE(decide(tree, tokenize("x"), s));
  CHECK_FALSE(decide(tree, tokenize("q"), s));
}

TEST_CASE("linear classifier with zero weights is constant") {
  const auto s = food_stats();
  const LinearClassifier lin({{"good", 0.0}}, 1.0);
  CHECK(decide(lin, tokenize("bad bad"), s));
  CHECK(decide(lin, tokenize("very good food"), s));
  const auto g = lin.input_gradient(tfidf(tokenize("good"), s));
  CHECK(g.at("good") == 0.0);
}

TEST_CASE("linear gradient equals the coefficients") {
  const auto s = food_stats();
  const LinearClassifier lin({{"good", 1.5}, {"bad", -2.0}}, -0.25);
  for (const char* text : {"good", "bad food", "very good good"}) {
    const auto g = lin.input_gradient(tfidf(tokenize(text), s));
    CHECK(g.at("good") == 1.5);
    CHECK(g.at("bad") == -2.0);
  }
  CHECK(lin.shifted(0.5).intercept() == -0.75);
  CHECK(lin.dependency_set() == std::set<std::string>{"bad", "good"});
}

TEST_CASE("mlp gradient matches central finite differences") {
  SeededRng rng(17);
  const std::vector<std::size_t> hidden{16, 16};
  const TinyMlp mlp = TinyMlp::initialize({"a", "b", "c", "d", "e"}, hidden, VectorizerKind::plain, rng);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(5);
    for (double& v : x) v = rng.normal();
    std::vector<double> grad(5);
    mlp.forward_backward(x, grad);
    for (std::size_t i = 0; i < x.size(); ++i) {
      auto hi = x, lo = x;
      hi[i] += 1e-5;
      lo[i] -= 1e-5;
      const double fd = (mlp.forward(hi) - mlp.forward(lo)) / 2e-5;
      CHECK(std::abs(fd - grad[i]) <= 1e-6);
    }
  }
}

TEST_CASE("zero output layer gives a zero gradient") {
  SeededRng rng(3);
  const std::vector<std::size_t> hidden{4};
  TinyMlp mlp = TinyMlp::initialize({"a", "b"}, hidden, VectorizerKind::plain, rng);
  auto& out = mlp.mutable_layers().back();
  std::fill(out.weights.begin(), out.weights.end(), 0.0);
  std::vector<double> x{0.3, -1.2}, grad(2);
  mlp.forward_backward(x, grad);
  CHECK(grad[0] == 0.0);
  CHECK(grad[1] == 0.0);
}

TEST_CASE("training") {
  std::vector<Document> docs;
  std::vector<int> labels;
  for (int i = 0; i < 20; ++i) {
    docs.push_back(tokenize(i % 2 ? "great movie" : "awful movie"));
    labels.push_back(i % 2);
  }
  const auto s = fit_corpus(docs);
  TrainOptions opts;
  opts.epochs = 300;
  opts.learning_rate = 1.0;

  SUBCASE("separable data is fitted exactly") {
    ModelTemplate lin;
    CHECK(train_tiny(lin, docs, labels, s, opts).train_accuracy == 1.0);
    ModelTemplate mlp;
    mlp.kind = ModelTemplate::Kind::mlp;
    CHECK(train_tiny(mlp, docs, labels, s, opts).train_accuracy == 1.0);
  }
  SUBCASE("zero epochs returns the initialization") {
    ModelTemplate mlp;
    mlp.kind = ModelTemplate::Kind::mlp;
    opts.epochs = 0;
    const auto trained = train_tiny(mlp, docs, labels, s, opts);
    SeededRng rng(opts.seed);
    std::vector<std::string> vocab;
    for (const auto& [w, n] : s.doc_freq()) vocab.push_back(w);
    const auto init = TinyMlp::initialize(vocab, mlp.hidden, mlp.vectorizer, rng);
    CHECK(trained.model->to_json() == init.to_json());
  }
  SUBCASE("same seed gives identical weights") {
    ModelTemplate mlp;
    mlp.kind = ModelTemplate::Kind::mlp;
    opts.epochs = 20;
    CHECK(train_tiny(mlp, docs, labels, s, opts).model->to_json() ==
          train_tiny(mlp, docs, labels, s, opts).model->to_json());
  }
  SUBCASE("one label only is rejected") {
    std::vector<int> ones(docs.size(), 1);
    CHECK_THROWS_AS(train_tiny(ModelTemplate{}, docs, ones, s, opts), InvalidArgument);
  }
}

TEST_CASE("model JSON round trips") {
  SeededRng rng(1);
  const std::vector<std::size_t> hidden{3};
  std::vector<std::unique_ptr<Classifier>> models;
  models.push_back(std::make_unique<PresenceRule>(std::set<std::string>{"very", "good"}));
  models.push_back(std::make_unique<SmallTree>("x", "y", "z"));
  models.push_back(std::make_unique<ConstantClassifier>(true));
  models.push_back(std::make_unique<LinearClassifier>(std::map<std::string, double>{{"a", 0.5}}, -0.1, Link::logistic,
                                                      VectorizerKind::normalized));
  models.push_back(std::make_unique<TinyMlp>(TinyMlp::initialize({"a", "b"}, hidden, VectorizerKind::plain, rng)));
  for (const auto& m : models) {
    const auto text = m->to_json();
    CHECK(text.back() == '\n');
    const auto loaded = load_model(text);
    CHECK(loaded->kind() == m->kind());
    CHECK(loaded->to_json() == text);
  }
  CHECK_THROWS_AS(load_model("{\"kind\": \"forest\"}"), InvalidArgument);
}

TEST_CASE("inline model specs") {
  CHECK(parse_model_spec("rule:very,good")->kind() == "presence_rule");
  CHECK(parse_model_spec("tree:a,b,c")->kind() == "small_tree");
  CHECK(parse_model_spec("const:1")->kind() == "constant");
  CHECK(parse_model_spec("model.json") == nullptr);
  CHECK_THROWS_AS(parse_model_spec("tree:a,b"), InvalidArgument);
}

TEST_CASE("bound classifiers agree with vectorized decisions") {
  const auto s = food_stats();
  const auto doc = tokenize("very good food very is");
  const auto view = local_view(doc, s);
  const LinearClassifier lin({{"very", 0.7}, {"good", 0.4}, {"food", -0.9}}, -0.5, Link::none, VectorizerKind::normalized);
  const PresenceRule rule({"very", "good"});
  const SmallTree tree("very", "is", "good");
  SeededRng rng(4);
  for (const Classifier* m : std::initializer_list<const Classifier*>{&lin, &rule, &tree}) {
    const auto bound = m->bind(view);
    for (int t = 0; t < 200; ++t) {
      std::vector<int> mult(view.size());
      Document perturbed;
      for (std::size_t j = 0; j < view.size(); ++j) {
        mult[j] = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(view.mult[j]) + 1));
        for (int k = 0; k < mult[j]; ++k) perturbed.tokens.push_back(view.words[j]);
      }
      CHECK(bound->decide(mult) == decide(*m, perturbed, s));
    }
  }
}
