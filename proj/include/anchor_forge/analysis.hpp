#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "anchor_forge/anchors.hpp"
#include "anchor_forge/models.hpp"

namespace anchor_forge {

/// Largest B with 2^B <= 1/epsilon, computed without logarithms so dyadic
/// epsilons land exactly.
int breakpoint(double epsilon);

/// Predicted anchor for a presence rule: one occurrence of each of the c0
/// lowest-multiplicity required words, where c0 is the smallest c >= 1 such
/// that the product of (1 - 2^-m) over the other k - c required words is at
/// least 1 - epsilon. When every required multiplicity is at most
/// breakpoint(epsilon) and epsilon is not a power of two this keeps all k.
///
/// Throws PreconditionError if a required word is missing or if required
/// multiplicities are not pairwise distinct.
Anchor predict_rule_anchor(const PresenceRule& model, const LocalView& view, double epsilon);

/// Greedy prefix in decreasing lambda_j * idf_j order: words are filled one
/// occurrence at a time until Phi_bar(L(A)) >= 1 - epsilon.
///
/// Throws PreconditionError unless the products lambda_j * idf_j are pairwise
/// distinct with at least one positive, gamma > 0 and lambda0 > -gamma / 2.
Anchor predict_linear_anchor(const LinearClassifier& model, const LocalView& view, double epsilon);

/// Reasons the greedy linear prediction's hypotheses fail; empty when they
/// hold.
std::vector<std::string> linear_prediction_violations(const LinearClassifier& model, const LocalView& view);

struct RankedWords {
  std::vector<std::string> words;
  std::vector<double> scores;

  std::set<std::string> top(std::size_t k) const;
};

/// score_j = dg/dphi_j (at the example's own vector) * idf_j, sorted in
/// decreasing order; equal scores keep first-occurrence order.
RankedWords gradient_idf_ranking(const Classifier& model, const Document& example, const CorpusStats& stats);

/// |a & b| / |a | b|. Throws InvalidArgument when both sets are empty.
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

struct SweepRow {
  double shift = 0.0;
  bool feasible = false;
  std::optional<Anchor> predicted;  // greedy prefix, when its hypotheses hold
  std::optional<Anchor> chosen;     // exhaustive search with the requested evaluation
  double precision = 0.0;
  std::size_t tie_count = 0;
  std::string note;
};

/// One row per shift S, using the model with intercept lambda0 - S.
std::vector<SweepRow> shift_sweep(const LinearClassifier& model, const LocalView& view,
                                  const std::vector<double>& shifts, double epsilon, SeededRng& rng,
                                  EvalKind kind = EvalKind::exact, std::size_t n_samples = 10000,
                                  const SearchOptions& options = {});

/// CSV with header shift,anchor,length,precision,feasible,predicted,tie_count.
std::string sweep_csv(const std::vector<SweepRow>& rows, const LocalView& view);

}  // namespace anchor_forge
