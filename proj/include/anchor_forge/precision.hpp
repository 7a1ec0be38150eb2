#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "anchor_forge/models.hpp"
#include "anchor_forge/rng.hpp"
#include "anchor_forge/sampling.hpp"

namespace anchor_forge {

enum class PrecisionMethod { exact, closed_form, monte_carlo, gaussian };

std::string_view to_string(PrecisionMethod method);

struct PrecisionEstimate {
  double value = 0.0;
  PrecisionMethod method = PrecisionMethod::exact;
  std::optional<double> error_bound;
  std::optional<std::size_t> n_samples;
  std::optional<std::string> warning;
};

inline constexpr double kDefaultEnumerationCutoff = 2e6;
inline constexpr double kBerryEsseenConstant = 7.15;

/// Number of joint multiplicity outcomes over the dependent indices of a
/// bound model, i.e. prod (m_j - a_j + 1).
double joint_state_count(const BoundClassifier& bound, const LocalView& view, const Anchor& anchor);

/// Sums P(M = k) * 1{f = 1} over every joint outcome of the words the bound
/// model depends on. Throws SearchSpaceError above `cutoff` states.
PrecisionEstimate precision_exact(const BoundClassifier& bound, const LocalView& view, const Anchor& anchor,
                                  double cutoff = kDefaultEnumerationCutoff);
PrecisionEstimate precision_exact(const Classifier& model, const LocalView& view, const Anchor& anchor,
                                  double cutoff = kDefaultEnumerationCutoff);

/// prod over required words with a_j = 0 of (1 - 2^-m_j). Throws
/// PreconditionError if a required word is missing from the view.
PrecisionEstimate precision_rule_closed_form(const PresenceRule& model, const LocalView& view, const Anchor& anchor);

/// Mean decision over n Bernoulli draws; error_bound is the Hoeffding delta at
/// confidence 0.99.
PrecisionEstimate precision_monte_carlo(const BoundClassifier& bound, const LocalView& view, const Anchor& anchor,
                                        std::size_t n, SeededRng& rng);
PrecisionEstimate precision_monte_carlo(const Classifier& model, const LocalView& view, const Anchor& anchor,
                                        std::size_t n, SeededRng& rng);

struct LinearApproxInputs {
  std::vector<double> alpha;  // lambda_j * idf_j
  std::vector<double> lambda;
  std::vector<double> idf;
  std::vector<int> mult;
  std::vector<int> anchor;
  double lambda0 = 0.0;

  double gamma() const;
  int length() const;  // b
  int anchor_length() const;
};

LinearApproxInputs linear_inputs(const LinearClassifier& model, const LocalView& view, const Anchor& anchor);
/// Inputs from explicit columns; idf defaults to all ones.
LinearApproxInputs linear_inputs(std::vector<double> lambda, std::vector<double> idf, std::vector<int> mult,
                                 std::vector<int> anchor, double lambda0);

/// Standard normal upper tail 1 - Phi(x), via std::erfc.
double phi_bar(double x);

/// Numerator and denominator of L, kept apart so callers can spot the
/// degenerate (zero variance) case.
struct LStatistic {
  double numerator = 0.0;
  double denominator = 0.0;
  std::optional<double> value() const;
};

LStatistic linear_L_parts(const LinearApproxInputs& in);
LStatistic normalized_L_parts(const LinearApproxInputs& in);
/// nullopt when the denominator vanishes.
std::optional<double> linear_L(const LinearApproxInputs& in);
std::optional<double> normalized_L(const LinearApproxInputs& in);

/// C * (max a^2 / min a^2)^{3/2} * (max m / min m)^{3/2} / sqrt(d).
double berry_esseen_bound(const LinearApproxInputs& in);

PrecisionEstimate gaussian_precision(const LinearApproxInputs& in);
PrecisionEstimate gaussian_precision_normalized(const LinearApproxInputs& in);

}  // namespace anchor_forge
