#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "anchor_forge/corpus.hpp"
#include "anchor_forge/rng.hpp"

namespace anchor_forge {

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyReport {
  std::string id;
  std::vector<Check> checks;
  nlohmann::json metrics = nlohmann::json::object();
  nlohmann::json counterexamples = nlohmann::json::array();

  bool passed() const;
  /// Throws InvalidArgument for an unknown check name.
  const Check& check(std::string_view name) const;
  nlohmann::json to_json() const;
};

struct VerifyOptions {
  std::uint64_t seed = kDefaultSeed;
  /// Number of trials or instances; 0 selects each procedure's default.
  int trials = 0;
  std::size_t threads = 0;
};

/// Known ids: sampling_equivalence, stability, concentration, dummy,
/// presence_rule, small_tree, gaussian_fit, linear_maximization,
/// normalized_fit, moments, gradient_idf.
std::vector<std::string> verification_ids();
VerifyReport run_verification(std::string_view id, const VerifyOptions& options = {});

VerifyReport verify_sampling_equivalence(const VerifyOptions& options = {});
/// Exact enumeration against the closed form on random rule instances.
VerifyReport verify_rule_oracle(const VerifyOptions& options = {});
/// The very/good breakpoint example at multiplicities 4 and 5.
VerifyReport verify_breakpoint(const VerifyOptions& options = {});
/// Breakpoint example, closed-form oracle and predicted-vs-searched anchors.
VerifyReport verify_presence_rule(const VerifyOptions& options = {});
VerifyReport verify_small_tree(const VerifyOptions& options = {});
VerifyReport verify_dummy(const VerifyOptions& options = {});
VerifyReport verify_gaussian_fit(const VerifyOptions& options = {});
VerifyReport verify_linear_maximization(const VerifyOptions& options = {});
VerifyReport verify_normalized_fit(const VerifyOptions& options = {});
/// Empirical-vs-exact agreement, uniform deviation and stability checks on
/// b = 8 rule instances.
VerifyReport verify_concentration_stability(const VerifyOptions& options = {});
VerifyReport verify_moments(const VerifyOptions& options = {});
VerifyReport verify_gradient_idf(const VerifyOptions& options = {});

/// Two-class corpus: label 1 iff a document contains a positive cue word.
LabeledCorpus synthetic_sentiment_corpus(std::size_t n_docs, SeededRng& rng);

}  // namespace anchor_forge
