#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "anchor_forge/models.hpp"
#include "anchor_forge/precision.hpp"
#include "anchor_forge/sampling.hpp"

namespace anchor_forge {

/// An evaluation function p over the anchors of one fixed view. Implementations
/// are immutable and safe to call concurrently; any randomness is derived
/// from the anchor itself so results do not depend on evaluation order.
class EvaluationFunction {
 public:
  virtual ~EvaluationFunction() = default;
  virtual double evaluate(const Anchor& anchor) const = 0;
  virtual std::string name() const = 0;
};

class ExactPrecision final : public EvaluationFunction {
 public:
  ExactPrecision(const Classifier& model, const LocalView& view, double cutoff = kDefaultEnumerationCutoff);
  double evaluate(const Anchor& anchor) const override;
  std::string name() const override { return "exact"; }

 private:
  LocalView view_;
  std::unique_ptr<BoundClassifier> bound_;
  double cutoff_;
};

class ClosedFormPrecision final : public EvaluationFunction {
 public:
  ClosedFormPrecision(const PresenceRule& model, const LocalView& view);
  double evaluate(const Anchor& anchor) const override;
  std::string name() const override { return "closed_form"; }

 private:
  PresenceRule model_;
  LocalView view_;
};

/// Empirical precision with n samples; each anchor draws from a stream
/// derived from (master_seed, anchor counts).
class MonteCarloPrecision final : public EvaluationFunction {
 public:
  MonteCarloPrecision(const Classifier& model, const LocalView& view, std::size_t n, std::uint64_t master_seed);
  double evaluate(const Anchor& anchor) const override;
  std::string name() const override { return "monte_carlo"; }
  std::size_t n() const { return n_; }

 private:
  LocalView view_;
  std::unique_ptr<BoundClassifier> bound_;
  std::size_t n_;
  SeededRng master_;
};

/// Phi_bar(L(A)) for a linear model (plain or normalized TF-IDF statistic).
class GaussianPrecision final : public EvaluationFunction {
 public:
  GaussianPrecision(const LinearClassifier& model, const LocalView& view, bool normalized = false);
  double evaluate(const Anchor& anchor) const override;
  std::string name() const override { return normalized_ ? "gaussian_normalized" : "gaussian"; }

 private:
  LinearApproxInputs base_;
  bool normalized_;
};

/// Wraps an arbitrary callable; used for tables and perturbed functions.
class FunctionEvaluation final : public EvaluationFunction {
 public:
  FunctionEvaluation(std::function<double(const Anchor&)> fn, std::string name);
  double evaluate(const Anchor& anchor) const override { return fn_(anchor); }
  std::string name() const override { return name_; }

 private:
  std::function<double(const Anchor&)> fn_;
  std::string name_;
};

/// Precomputed values; anchors missing from the table evaluate to 0.
class TableEvaluation final : public EvaluationFunction {
 public:
  TableEvaluation(std::map<Anchor, double> table, std::string name);
  double evaluate(const Anchor& anchor) const override;
  std::string name() const override { return name_; }
  const std::map<Anchor, double>& table() const { return table_; }

 private:
  std::map<Anchor, double> table_;
  std::string name_;
};

enum class EvalKind { exact, closed_form, monte_carlo, gaussian, gaussian_normalized };

EvalKind eval_kind_from_string(std::string_view name);
std::string_view to_string(EvalKind kind);

/// Builds the evaluation function of `kind` for `model` on `view`. Throws
/// InvalidArgument when the model type does not support the kind.
std::unique_ptr<EvaluationFunction> make_evaluation(EvalKind kind, const Classifier& model, const LocalView& view,
                                                    std::size_t n_samples, std::uint64_t seed);

inline constexpr double kDefaultSearchCutoff = 1e7;
inline constexpr double kTieTolerance = 1e-12;

/// prod (m_j + 1) - 1.
double anchor_space_size(const LocalView& view);

/// Every anchor of the view except the zero vector, in colexicographic order
/// (the first word's count varies fastest). For m = (1, 1) this yields
/// (1,0), (0,1), (1,1).
std::vector<Anchor> enumerate_anchors(const LocalView& view, double cutoff = kDefaultSearchCutoff);

/// Anchors of total length `length`, in the same relative order as
/// enumerate_anchors.
std::vector<Anchor> enumerate_anchors_of_length(const LocalView& view, int length);

struct ScoredAnchor {
  Anchor anchor;
  double value = 0.0;
};

struct SelectionTrace {
  std::size_t a1_size = 0;
  /// False when the level-wise search stopped before visiting longer anchors;
  /// a1_size then counts only feasible anchors of the visited lengths.
  bool a1_complete = true;
  std::size_t evaluated = 0;
  std::vector<ScoredAnchor> a2;
  std::vector<ScoredAnchor> a3;
  Anchor chosen;
  double chosen_value = 0.0;
  std::size_t tie_count = 0;
  double epsilon = 0.0;
  std::string evaluation;
  std::optional<std::vector<ScoredAnchor>> space;
};

struct SearchOptions {
  double cutoff = kDefaultSearchCutoff;
  /// Visit lengths in increasing order and stop at the first length with a
  /// feasible anchor. A2, A3 and the chosen anchor are unaffected.
  bool prune = true;
  /// Keep every (anchor, value) pair; forces a full pass.
  bool dump_space = false;
  std::size_t threads = 0;
};

SelectionTrace exhaustive_p_anchors(const LocalView& view, const EvaluationFunction& p, double epsilon,
                                    SeededRng& rng, const SearchOptions& options = {});

/// Exhaustive search with the Monte-Carlo evaluation function. The master
/// seed of the per-anchor streams is drawn from `rng` before the search.
SelectionTrace empirical_anchors(const LocalView& view, const Classifier& model, double epsilon, std::size_t n,
                                 SeededRng& rng, const SearchOptions& options = {});

struct StabilityReport {
  double delta = 0.0;
  bool delta_small = false;   // delta < epsilon / 4
  bool hypothesis_i = false;  // p(A*) >= 1 - epsilon / 4
  bool hypothesis_ii = false; // p(A) <= 1 - 3 epsilon / 4 on A2 \ {A*}
  Anchor a_star;
  std::optional<Anchor> a_q;  // A^q(epsilon - delta), computed when the hypotheses hold
  bool hypotheses_met() const { return delta_small && hypothesis_i && hypothesis_ii; }
  /// nullopt when the hypotheses are not met.
  std::optional<bool> passed;
};

StabilityReport check_stability(const EvaluationFunction& p, const EvaluationFunction& q, const LocalView& view,
                                double epsilon, SeededRng& rng, const SearchOptions& options = {});

}  // namespace anchor_forge
