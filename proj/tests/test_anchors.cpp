#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "anchor_forge/anchors.hpp"
#include "anchor_forge/errors.hpp"

using namespace anchor_forge;

namespace {
LocalView ones_view(std::vector<std::string> words, std::vector<int> mult) {
  std::vector<double> idf(words.size(), 1.0);
  return make_view(std::move(words), std::move(mult), std::move(idf));
}
}  // namespace

TEST_CASE("enumeration order and size") {
  const auto one = enumerate_anchors(ones_view({"a"}, {2}));
  REQUIRE(one.size() == 2);
  CHECK(one[0].counts == std::vector<int>{1});
  CHECK(one[1].counts == std::vector<int>{2});

  const auto two = enumerate_anchors(ones_view({"a", "b"}, {1, 1}));
  REQUIRE(two.size() == 3);
  CHECK(two[0].counts == std::vector<int>{1, 0});
  CHECK(two[1].counts == std::vector<int>{0, 1});
  CHECK(two[2].counts == std::vector<int>{1, 1});

  const auto v = ones_view({"a", "b", "c"}, {2, 1, 3});
  CHECK(anchor_space_size(v) == 3.0 * 2.0 * 4.0 - 1.0);
  CHECK(enumerate_anchors(v).size() == 23);
  CHECK_THROWS_AS(enumerate_anchors(v, 10.0), SearchSpaceError);

  std::size_t total = 0;
  for (int len = 1; len <= v.length(); ++len) {
    const auto level = enumerate_anchors_of_length(v, len);
    for (const auto& a : level) CHECK(a.length() == len);
    total += level.size();
  }
  CHECK(total == 23);
}

TEST_CASE("small tree selects the third word for every epsilon") {
  const auto v = ones_view({"w1", "w2", "w3"}, {1, 1, 1});
  const SmallTree tree("w1", "w2", "w3");
  const ExactPrecision p(tree, v);
  for (double eps : {0.01, 0.05, 0.2, 0.5, 0.9}) {
    SeededRng rng(1);
    CHECK(exhaustive_p_anchors(v, p, eps, rng).chosen.counts == std::vector<int>{0, 0, 1});
  }
}

TEST_CASE("very good example keeps both words") {
  const auto v = ones_view({"food", "is", "very", "good"}, {1, 1, 1, 1});
  const PresenceRule rule({"very", "good"});
  SeededRng rng(2);
  const auto t = exhaustive_p_anchors(v, ExactPrecision(rule, v), 0.05, rng);
  CHECK(t.chosen.counts == std::vector<int>{0, 0, 1, 1});
  CHECK(t.chosen_value == 1.0);
  CHECK(t.tie_count == 1);
}

TEST_CASE("constant model ties every length-one anchor") {
  const auto v = ones_view({"a", "b", "c"}, {2, 1, 1});
  const ConstantClassifier one(true);
  std::set<std::vector<int>> seen;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    SeededRng rng(seed);
    const auto t = exhaustive_p_anchors(v, ExactPrecision(one, v), 0.1, rng);
    CHECK(t.a2.size() == 3);
    CHECK(t.tie_count == 3);
    CHECK(t.chosen.length() == 1);
    seen.insert(t.chosen.counts);
  }
  CHECK(seen.size() == 3);
}

TEST_CASE("single-token document") {
  const auto v = ones_view({"only"}, {1});
  SeededRng rng(5);
  const auto t = exhaustive_p_anchors(v, ExactPrecision(PresenceRule({"only"}), v), 0.05, rng);
  CHECK(t.chosen.counts == std::vector<int>{1});
}

TEST_CASE("ties within tolerance and an unattainable threshold") {
  const auto v = ones_view({"a", "b"}, {1, 1});
  std::map<Anchor, double> table{{Anchor{{1, 0}}, 0.96}, {Anchor{{0, 1}}, 0.96 + 1e-13}, {Anchor{{1, 1}}, 1.0}};
  SeededRng rng(1);
  const auto t = exhaustive_p_anchors(v, TableEvaluation(table, "table"), 0.05, rng);
  CHECK(t.tie_count == 2);
  CHECK(t.evaluation == "table");
  const TableEvaluation low({{Anchor{{1, 1}}, 0.5}}, "low");
  CHECK_THROWS_AS(exhaustive_p_anchors(v, low, 0.05, rng), PreconditionError);
  CHECK_THROWS_AS(exhaustive_p_anchors(v, low, 0.0, rng), InvalidArgument);
}

TEST_CASE("pruned and full search agree, and the trace is deterministic") {
  SeededRng gen(77);
  for (int t = 0; t < 30; ++t) {
    const auto v = ones_view({"a", "b", "c", "d"}, {1 + static_cast<int>(gen.uniform_below(3)), 2, 1,
                                                   1 + static_cast<int>(gen.uniform_below(2))});
    const LinearClassifier lin({{"a", gen.normal()}, {"b", gen.normal()}, {"c", gen.normal()}, {"d", gen.normal()}},
                               1.0);
    if (!lin.bind(v)->decide(v.mult)) continue;
    const ExactPrecision p(lin, v);
    SearchOptions full;
    full.prune = false;
    full.dump_space = true;
    SeededRng r1(t), r2(t), r3(t);
    const auto a = exhaustive_p_anchors(v, p, 0.1, r1);
    const auto b = exhaustive_p_anchors(v, p, 0.1, r2, full);
    const auto c = exhaustive_p_anchors(v, p, 0.1, r3);
    CHECK(a.chosen == b.chosen);
    CHECK(a.tie_count == b.tie_count);
    CHECK(a.a2.size() == b.a2.size());
    CHECK(a.chosen == c.chosen);
    CHECK(a.chosen_value == c.chosen_value);
    REQUIRE(b.space.has_value());
    CHECK(b.space->size() == static_cast<std::size_t>(anchor_space_size(v)));
    CHECK(b.a1_complete);
  }
}

TEST_CASE("parallel evaluation gives the same trace") {
  const auto v = ones_view({"a", "b", "c", "d", "e"}, {3, 2, 2, 1, 1});
  const PresenceRule rule({"a", "b", "d"});
  const ExactPrecision p(rule, v);
  SearchOptions one, four;
  one.threads = 1;
  four.threads = 4;
  SeededRng r1(3), r2(3);
  const auto x = exhaustive_p_anchors(v, p, 0.2, r1, one);
  const auto y = exhaustive_p_anchors(v, p, 0.2, r2, four);
  CHECK(x.chosen == y.chosen);
  CHECK(x.evaluated == y.evaluated);
}

TEST_CASE("empirical anchors never pick a dummy at large n") {
  const auto v = ones_view({"u", "v", "dummy"}, {2, 1, 1});
  const PresenceRule rule({"u", "v"});
  SeededRng rng(8);
  const auto t = empirical_anchors(v, rule, 0.1, 20000, rng);
  CHECK(t.chosen.counts[2] == 0);
  CHECK(t.evaluation == "monte_carlo");
}

TEST_CASE("stability checker") {
  const auto v = ones_view({"u", "v", "x"}, {7, 1, 2});
  const PresenceRule rule({"u", "v"});
  const ExactPrecision p(rule, v);
  SeededRng rng(4);
  SUBCASE("q equal to p") {
    const auto r = check_stability(p, p, v, 0.05, rng);
    CHECK(r.delta == 0.0);
    REQUIRE(r.hypotheses_met());
    REQUIRE(r.passed.has_value());
    CHECK(*r.passed);
    CHECK(r.a_star.counts == std::vector<int>{0, 1, 0});
  }
  SUBCASE("q with small bounded noise") {
    const double eps = 0.05;
    const FunctionEvaluation q(
        [&](const Anchor& a) {
          SeededRng noise = SeededRng(99).derive(a.counts);
          return std::min(1.0, p.evaluate(a) + (noise.uniform01() - 0.5) * (eps / 8.0));
        },
        "noisy");
    const auto r = check_stability(p, q, v, eps, rng);
    CHECK(r.delta < eps / 8.0);
    REQUIRE(r.hypotheses_met());
    CHECK(r.passed == std::optional<bool>{true});
  }
}

TEST_CASE("evaluation factory") {
  const auto v = ones_view({"a", "b"}, {1, 1});
  const PresenceRule rule({"a"});
  const LinearClassifier lin({{"a", 1.0}}, -0.5);
  CHECK(make_evaluation(EvalKind::exact, rule, v, 100, 1)->name() == "exact");
  CHECK(make_evaluation(EvalKind::closed_form, rule, v, 100, 1)->name() == "closed_form");
  CHECK(make_evaluation(EvalKind::monte_carlo, rule, v, 100, 1)->name() == "monte_carlo");
  CHECK(make_evaluation(EvalKind::gaussian_normalized, lin, v, 100, 1)->name() == "gaussian_normalized");
  CHECK_THROWS_AS(make_evaluation(EvalKind::gaussian, rule, v, 100, 1), InvalidArgument);
  CHECK_THROWS_AS(make_evaluation(EvalKind::closed_form, lin, v, 100, 1), InvalidArgument);
  CHECK(eval_kind_from_string("gaussian") == EvalKind::gaussian);
  CHECK_THROWS_AS(eval_kind_from_string("bandit"), InvalidArgument);
}
