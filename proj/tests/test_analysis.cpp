#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "anchor_forge/analysis.hpp"
#include "anchor_forge/errors.hpp"

using namespace anchor_forge;

TEST_CASE("breakpoint") {
  CHECK(breakpoint(0.05) == 4);
  CHECK(breakpoint(0.5) == 1);
  CHECK(breakpoint(0.01) == 6);
  CHECK(breakpoint(0.25) == 2);
  CHECK_THROWS_AS(breakpoint(0.0), InvalidArgument);
}

TEST_CASE("rule prediction at the breakpoint") {
  const PresenceRule rule({"very", "good"});
  const auto m4 = make_view({"food", "very", "good"}, {1, 4, 1}, {1.0, 1.0, 1.0});
  const auto m5 = make_view({"food", "very", "good"}, {1, 5, 1}, {1.0, 1.0, 1.0});
  CHECK(predict_rule_anchor(rule, m4, 0.05).counts == std::vector<int>{0, 1, 1});
  CHECK(predict_rule_anchor(rule, m5, 0.05).counts == std::vector<int>{0, 0, 1});
  for (const auto* v : {&m4, &m5}) {
    SeededRng rng(1);
    CHECK(exhaustive_p_anchors(*v, ExactPrecision(rule, *v), 0.05, rng).chosen ==
          predict_rule_anchor(rule, *v, 0.05));
  }
  const auto tied = make_view({"very", "good"}, {2, 2}, {1.0, 1.0});
  CHECK_THROWS_AS(predict_rule_anchor(rule, tied, 0.05), PreconditionError);
  const auto missing = make_view({"very"}, {2}, {1.0});
  CHECK_THROWS_AS(predict_rule_anchor(rule, missing, 0.05), PreconditionError);
}

TEST_CASE("greedy linear prediction") {
  const auto v = make_view({"great", "ok", "bad"}, {1, 1, 1}, {1.0, 1.0, 1.0});
  const LinearClassifier strong({{"great", 5.0}, {"ok", 0.5}, {"bad", -0.2}}, 0.1);
  CHECK(linear_prediction_violations(strong, v).empty());
  const auto a = predict_linear_anchor(strong, v, 0.05);
  CHECK(a.counts == std::vector<int>{1, 0, 0});
  SeededRng rng(3);
  CHECK(exhaustive_p_anchors(v, GaussianPrecision(strong, v), 0.05, rng).chosen == a);

  const LinearClassifier tied({{"great", 1.0}, {"ok", 1.0}}, 0.0);
  CHECK_FALSE(linear_prediction_violations(tied, v).empty());
  CHECK_THROWS_AS(predict_linear_anchor(tied, v, 0.05), PreconditionError);
}

TEST_CASE("gradient ranking") {
  const auto s = fit_corpus(std::vector<Document>{tokenize("a b"), tokenize("b c"), tokenize("c d")});
  const LinearClassifier lin({{"a", 0.2}, {"b", 1.0}, {"c", -0.4}}, 0.0);
  const auto doc = tokenize("c a b");
  const auto r = gradient_idf_ranking(lin, doc, s);
  const auto view = local_view(doc, s);
  std::vector<std::pair<double, std::string>> expected;
  for (std::size_t j = 0; j < view.size(); ++j) expected.emplace_back(-lin.coefficient(view.words[j]) * view.idf[j], view.words[j]);
  std::sort(expected.begin(), expected.end());
  for (std::size_t i = 0; i < expected.size(); ++i) CHECK(r.words[i] == expected[i].second);
  CHECK(r.top(1) == std::set<std::string>{"b"});
  CHECK_THROWS_AS(gradient_idf_ranking(PresenceRule({"a"}), doc, s), NotDifferentiableError);
}

TEST_CASE("jaccard") {
  CHECK(jaccard({"a", "b"}, {"a", "b"}) == 1.0);
  CHECK(jaccard({"a"}, {"b"}) == 0.0);
  CHECK(jaccard({"a", "b", "c"}, {"b", "c", "d"}) == 0.5);
  CHECK_THROWS_AS(jaccard({}, {}), InvalidArgument);
}

TEST_CASE("shift sweep") {
  const auto v = make_view({"great", "ok", "bad"}, {1, 1, 1}, {1.0, 1.0, 1.0});
  const LinearClassifier lin({{"great", 5.0}, {"ok", 0.5}, {"bad", -0.2}}, 0.1);
  SeededRng rng(5);
  const auto rows = shift_sweep(lin, v, {-2.0, 0.0, 100.0}, 0.05, rng, EvalKind::gaussian);
  REQUIRE(rows.size() == 3);
  REQUIRE(rows[0].chosen.has_value());
  CHECK(rows[0].chosen->length() == 1);
  CHECK_FALSE(rows[2].feasible);
  const auto csv = sweep_csv(rows, v);
  CHECK(csv.rfind("shift,anchor,length,precision,feasible,predicted,tie_count\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}
