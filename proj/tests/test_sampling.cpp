#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "anchor_forge/errors.hpp"
#include "anchor_forge/sampling.hpp"

using namespace anchor_forge;

TEST_CASE("rng streams are reproducible and derived streams differ") {
  SeededRng a(7), b(7), c(8);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  CHECK(SeededRng(7).next_u64() != c.next_u64());
  const std::vector<int> key{1, 0, 2};
  SeededRng base(7);
  auto d1 = base.derive(key), d2 = base.derive(key);
  CHECK(d1.next_u64() == d2.next_u64());
  CHECK(base.counter() == 0);
  CHECK(base.derive(std::uint64_t{1}).next_u64() != base.derive(std::uint64_t{2}).next_u64());
}

TEST_CASE("rng distribution helpers") {
  SeededRng rng(11);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(sq / n == doctest::Approx(1.0).epsilon(0.02));
  for (int i = 0; i < 1000; ++i) CHECK(rng.uniform_below(7) < 7);
  for (int i = 0; i < 1000; ++i) {
    const int k = rng.binomial_half(70);
    REQUIRE(k >= 0);
    REQUIRE(k <= 70);
  }
}

TEST_CASE("binomial pmf and multiplicity law") {
  CHECK(binomial_half_pmf(2, 1) == 0.5);
  CHECK(binomial_half_pmf(4, 2) == 6.0 / 16.0);
  CHECK(binomial_half_pmf(3, 4) == 0.0);
  const auto point = multiplicity_law(3, 3);
  CHECK(point.first == 3);
  CHECK(point.mass == std::vector<double>{1.0});
  const auto law = multiplicity_law(2, 0);
  CHECK(law.mass == std::vector<double>{0.25, 0.5, 0.25});
  CHECK(law.pmf(1) == 0.5);
  CHECK(law.pmf(5) == 0.0);
  const auto l2 = multiplicity_law(7, 2);
  CHECK(l2.mean() == doctest::Approx(4.5));
  CHECK(l2.variance() == doctest::Approx(1.25));
  CHECK_THROWS_AS(multiplicity_law(2, 3), InvalidArgument);
}

TEST_CASE("anchors: validation, rendering and word sets") {
  const auto v = make_view({"food", "very", "good"}, {1, 2, 1}, {1.0, 2.0, 3.0});
  CHECK_THROWS_AS(validate_anchor(v, Anchor{{0, 0, 0}}), InvalidArgument);
  CHECK_THROWS_AS(validate_anchor(v, Anchor{{0, 3, 0}}), InvalidArgument);
  CHECK_THROWS_AS(validate_anchor(v, Anchor{{1, 0}}), InvalidArgument);
  CHECK_NOTHROW(validate_anchor(v, Anchor{{0, 2, 1}}));
  CHECK(render_anchor(v, Anchor{{0, 2, 1}}) == "very x2 good");
  CHECK(anchor_words(v, Anchor{{1, 0, 1}}) == std::vector<std::string>{"food", "good"});
  CHECK(full_anchor(v).counts == std::vector<int>{1, 2, 1});
  CHECK(full_anchor(v).length() == 4);
}

TEST_CASE("positional anchors convert to multiplicity anchors") {
  const Document doc{{"very", "good", "very", "food"}};
  const auto v = make_view({"very", "good", "food"}, {2, 1, 1}, {1.0, 1.0, 1.0});
  CHECK(to_multiplicity_anchor(doc, v, PositionalAnchor{{0, 2}}).counts == std::vector<int>{2, 0, 0});
  CHECK(to_multiplicity_anchor(doc, v, PositionalAnchor{{1, 2}}).counts == std::vector<int>{1, 1, 0});
  CHECK_THROWS_AS(to_multiplicity_anchor(doc, v, PositionalAnchor{{9}}), InvalidArgument);
}

TEST_CASE("Bernoulli sampler respects the anchor and matches the moment law") {
  const auto v = make_view({"a", "b", "c"}, {4, 3, 1}, {1.0, 1.0, 1.0});
  const Anchor anchor{{1, 3, 0}};
  SeededRng rng(3);
  BernoulliSampler sampler(v, anchor);
  std::vector<int> out(3);
  const int n = 100000;
  double sum_a = 0.0, sq_a = 0.0;
  for (int i = 0; i < n; ++i) {
    sampler.draw(rng, out);
    REQUIRE(out[1] == 3);
    REQUIRE(out[0] >= 1);
    REQUIRE(out[0] <= 4);
    sum_a += out[0];
    sq_a += out[0] * out[0];
  }
  const double mean = sum_a / n;
  CHECK(mean == doctest::Approx((4 + 1) / 2.0).epsilon(0.01));
  CHECK(sq_a / n - mean * mean == doctest::Approx((4 - 1) / 4.0).epsilon(0.03));
}

TEST_CASE("sampler streams are deterministic") {
  const auto v = make_view({"a", "b"}, {40, 30}, {1.0, 1.0});
  SeededRng r1(5), r2(5);
  for (int i = 0; i < 50; ++i) {
    CHECK(sample_bernoulli(v, Anchor{{0, 1}}, r1) == sample_bernoulli(v, Anchor{{0, 1}}, r2));
  }
}

TEST_CASE("three-step scheme") {
  const Document doc{{"the", "food", "is", "good"}};
  SeededRng rng(9);
  const auto all = sample_three_step(doc, PositionalAnchor{{0, 1, 2, 3}}, 5, rng);
  REQUIRE(all.size() == 5);
  for (const auto& d : all) CHECK(d == doc);

  const Document two{{"x", "y"}};
  int replaced = 0;
  const int runs = 10000;
  for (int i = 0; i < runs; ++i) {
    const auto s = sample_three_step(two, PositionalAnchor{{0}}, 1, rng);
    REQUIRE(s[0].tokens[0] == "x");
    replaced += s[0].tokens[1] == kUnkToken ? 1 : 0;
  }
  CHECK(std::abs(replaced / static_cast<double>(runs) - 0.5) < 0.02);
}
