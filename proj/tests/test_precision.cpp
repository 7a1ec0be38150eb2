#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "anchor_forge/errors.hpp"
#include "anchor_forge/precision.hpp"

using namespace anchor_forge;

namespace {
LocalView uniform_view(std::vector<std::string> words, std::vector<int> mult) {
  std::vector<double> idf(words.size(), 1.0);
  return make_view(std::move(words), std::move(mult), std::move(idf));
}
}  // namespace

TEST_CASE("exact precision of the full anchor is 1") {
  const auto v = uniform_view({"very", "good", "food"}, {2, 1, 1});
  const PresenceRule rule({"very", "good"});
  CHECK(precision_exact(rule, v, full_anchor(v)).value == 1.0);
  const SmallTree tree("food", "very", "good");
  CHECK(precision_exact(tree, v, Anchor{{0, 1, 0}}).value == 1.0);
}

TEST_CASE("single-word rule precision") {
  const auto v = uniform_view({"w", "x"}, {3, 1});
  const PresenceRule rule({"w"});
  const Anchor a{{0, 1}};
  CHECK(precision_exact(rule, v, a).value == 7.0 / 8.0);
  CHECK(precision_rule_closed_form(rule, v, a).value == 7.0 / 8.0);
}

TEST_CASE("closed form for a two-word rule") {
  const auto v = uniform_view({"u", "v"}, {4, 1});
  const PresenceRule rule({"u", "v"});
  CHECK(precision_rule_closed_form(rule, v, Anchor{{0, 1}}).value == 0.9375);
  CHECK(precision_exact(rule, v, Anchor{{0, 1}}).value == 0.9375);
  CHECK(precision_rule_closed_form(rule, v, Anchor{{1, 1}}).value == 1.0);
  CHECK_THROWS_AS(precision_rule_closed_form(PresenceRule({"zzz"}), v, Anchor{{1, 0}}), PreconditionError);
}

TEST_CASE("exact enumeration cutoff") {
  const auto v = uniform_view({"a", "b"}, {60, 60});
  const LinearClassifier lin({{"a", 1.0}, {"b", 1.0}}, -1.0);
  CHECK_THROWS_AS(precision_exact(lin, v, Anchor{{1, 0}}, 100.0), SearchSpaceError);
}

TEST_CASE("Monte-Carlo precision") {
  const auto v = uniform_view({"w", "x"}, {3, 2});
  const PresenceRule rule({"w"});
  SeededRng rng(1);
  const auto full = precision_monte_carlo(rule, v, full_anchor(v), 50, rng);
  CHECK(full.value == 1.0);
  const auto est = precision_monte_carlo(rule, v, Anchor{{0, 1}}, 100000, rng);
  CHECK(std::abs(est.value - 7.0 / 8.0) < 0.01);
  REQUIRE(est.error_bound.has_value());
  CHECK(*est.error_bound == doctest::Approx(std::sqrt(std::log(2.0 / 0.01) / (2.0 * 100000))).epsilon(1e-9));
  CHECK(precision_monte_carlo(ConstantClassifier(true), v, Anchor{{1, 0}}, 100, rng).value == 1.0);
  SeededRng r1(9), r2(9);
  CHECK(precision_monte_carlo(rule, v, Anchor{{0, 1}}, 1000, r1).value ==
        precision_monte_carlo(rule, v, Anchor{{0, 1}}, 1000, r2).value);
}

TEST_CASE("L statistic worked values") {
  const auto one = linear_inputs({1.0}, {1.0}, {1}, {0}, 0.0);
  REQUIRE(linear_L(one).has_value());
  CHECK(*linear_L(one) == doctest::Approx(-1.0));

  const auto sym = linear_inputs({1.0, 2.0}, {1.0, 1.0}, {2, 1}, {0, 0}, -2.0);
  CHECK(*linear_L(sym) == doctest::Approx(0.0));
  CHECK(gaussian_precision(sym).value == doctest::Approx(0.5));
  CHECK(phi_bar(0.0) == 0.5);
  CHECK(phi_bar(-1.0) == doctest::Approx(0.8413447460685429));
}

TEST_CASE("degenerate variance returns the exact indicator") {
  const auto full = linear_inputs({1.0, -0.5}, {1.0, 2.0}, {2, 1}, {2, 1}, 0.5);
  CHECK_FALSE(linear_L(full).has_value());
  const auto est = gaussian_precision(full);
  CHECK(est.value == 1.0);
  CHECK(est.method == PrecisionMethod::exact);
  const auto neg = linear_inputs({-1.0}, {1.0}, {1}, {1}, 0.5);
  CHECK(gaussian_precision(neg).value == 0.0);
}

TEST_CASE("Berry-Esseen bound") {
  const std::size_t d = 100;
  const auto in = linear_inputs(std::vector<double>(d, 0.3), std::vector<double>(d, 2.0), std::vector<int>(d, 3),
                                std::vector<int>(d, 0), 0.0);
  CHECK(berry_esseen_bound(in) == doctest::Approx(0.715));
  const auto big = linear_inputs(std::vector<double>(10000, -1.0), {}, std::vector<int>(10000, 1),
                                 std::vector<int>(10000, 0), 0.0);
  CHECK(berry_esseen_bound(big) == doctest::Approx(0.0715));
  CHECK_THROWS_AS(berry_esseen_bound(linear_inputs({0.0, 1.0}, {}, {1, 1}, {0, 0}, 0.0)), PreconditionError);
}

TEST_CASE("normalized L") {
  const auto sym = linear_inputs({1.0, -1.0}, {1.0, 1.0}, {1, 1}, {1, 1}, 0.0);
  CHECK(normalized_L_parts(sym).numerator == doctest::Approx(0.0));
  SeededRng rng(2);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> lambda(4), idf(4);
    std::vector<int> mult(4), anchor(4);
    for (int j = 0; j < 4; ++j) {
      lambda[j] = rng.normal();
      idf[j] = 1.0 + rng.uniform01();
      mult[j] = 1 + static_cast<int>(rng.uniform_below(3));
      anchor[j] = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(mult[j])));
    }
    const auto in = linear_inputs(lambda, idf, mult, anchor, 0.0);
    const auto plain = linear_L(in), norm = normalized_L(in);
    REQUIRE(plain.has_value());
    REQUIRE(norm.has_value());
    CHECK(*norm == doctest::Approx(*plain));
  }
}

TEST_CASE("gaussian precision flags long anchors") {
  const auto in = linear_inputs({1.0, 0.5, 0.2}, {}, {1, 1, 1}, {1, 1, 0}, 0.1);
  CHECK(gaussian_precision(in).warning.has_value());
  const auto in2 = linear_inputs({1.0, 0.5, 0.2}, {}, {1, 1, 1}, {1, 0, 0}, 0.1);
  CHECK_FALSE(gaussian_precision(in2).warning.has_value());
  CHECK(gaussian_precision(in2).error_bound.has_value());
}
