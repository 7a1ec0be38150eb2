#include "anchor_forge/precision.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "anchor_forge/errors.hpp"
#include "anchor_forge/stats.hpp"

namespace anchor_forge {

std::string_view to_string(PrecisionMethod method) {
  switch (method) {
    case PrecisionMethod::exact: return "exact";
    case PrecisionMethod::closed_form: return "closed_form";
    case PrecisionMethod::monte_carlo: return "monte_carlo";
    case PrecisionMethod::gaussian: return "gaussian";
  }
  return "exact";
}

double joint_state_count(const BoundClassifier& bound, const LocalView& view, const Anchor& anchor) {
  double states = 1.0;
  for (std::size_t j : bound.dependent_indices()) states *= view.mult[j] - anchor.counts[j] + 1;
  return states;
}

PrecisionEstimate precision_exact(const BoundClassifier& bound, const LocalView& view, const Anchor& anchor,
                                  double cutoff) {
  validate_anchor(view, anchor);
  const double states = joint_state_count(bound, view, anchor);
  if (states > cutoff) {
    throw SearchSpaceError("exact precision needs " + std::to_string(static_cast<long long>(states)) +
                           " joint states (cutoff " + std::to_string(static_cast<long long>(cutoff)) +
                           "); use Monte-Carlo evaluation or cap multiplicities");
  }
  std::vector<std::size_t> free_idx;
  std::vector<MultiplicityLaw> laws;
  for (std::size_t j : bound.dependent_indices()) {
    if (view.mult[j] > anchor.counts[j]) {
      free_idx.push_back(j);
      laws.push_back(multiplicity_law(view.mult[j], anchor.counts[j]));
    }
  }
  std::vector<int> m = view.mult;
  for (std::size_t j : free_idx) m[j] = anchor.counts[j];

  // Odometer over the free dependent words, first index fastest. suffix[r]
  // holds the product of the masses of positions r..k-1, so an increment at
  // position i only invalidates suffix[0..i].
  const std::size_t k = free_idx.size();
  std::vector<double> suffix(k + 1, 1.0);
  for (std::size_t r = k; r-- > 0;) suffix[r] = suffix[r + 1] * laws[r].mass[0];
  double total = 0.0;
  while (true) {
    if (bound.decide(m)) total += suffix[0];
    std::size_t i = 0;
    for (; i < k; ++i) {
      const std::size_t j = free_idx[i];
      if (m[j] < view.mult[j]) {
        ++m[j];
        break;
      }
      m[j] = anchor.counts[j];
    }
    if (i == k) break;
    for (std::size_t r = i + 1; r-- > 0;) suffix[r] = suffix[r + 1] * laws[r].pmf(m[free_idx[r]]);
  }
  PrecisionEstimate est;
  est.value = std::clamp(total, 0.0, 1.0);
  est.method = PrecisionMethod::exact;
  return est;
}

PrecisionEstimate precision_exact(const Classifier& model, const LocalView& view, const Anchor& anchor,
                                  double cutoff) {
  return precision_exact(*model.bind(view), view, anchor, cutoff);
}

PrecisionEstimate precision_rule_closed_form(const PresenceRule& model, const LocalView& view, const Anchor& anchor) {
  validate_anchor(view, anchor);
  double value = 1.0;
  for (const std::string& word : model.required_words()) {
    auto j = view.index_of(word);
    if (!j || view.idf[*j] <= 0.0) {
      throw PreconditionError("required word '" + word + "' is absent from the example, so f(example) = 0");
    }
    if (anchor.counts[*j] == 0) value *= 1.0 - std::ldexp(1.0, -view.mult[*j]);
  }
  PrecisionEstimate est;
  est.value = value;
  est.method = PrecisionMethod::closed_form;
  return est;
}

PrecisionEstimate precision_monte_carlo(const BoundClassifier& bound, const LocalView& view, const Anchor& anchor,
                                        std::size_t n, SeededRng& rng) {
  if (n < 1) throw InvalidArgument("monte carlo precision needs n >= 1");
  validate_anchor(view, anchor);
  // Restrict sampling to the dependent words; the others cannot move f.
  std::vector<std::size_t> dep = bound.dependent_indices();
  LocalView sub;
  Anchor sub_anchor;
  for (std::size_t j : dep) {
    sub.words.push_back(view.words[j]);
    sub.mult.push_back(view.mult[j]);
    sub.idf.push_back(view.idf[j]);
    sub_anchor.counts.push_back(anchor.counts[j]);
  }
  BernoulliSampler sampler(sub, sub_anchor);
  std::vector<int> m = view.mult;
  std::vector<int> draw(dep.size());
  std::size_t hits = 0;
  for (std::size_t s = 0; s < n; ++s) {
    sampler.draw(rng, draw);
    for (std::size_t i = 0; i < dep.size(); ++i) m[dep[i]] = draw[i];
    if (bound.decide(m)) ++hits;
  }
  PrecisionEstimate est;
  est.value = static_cast<double>(hits) / static_cast<double>(n);
  est.method = PrecisionMethod::monte_carlo;
  est.n_samples = n;
  est.error_bound = hoeffding_delta(n, 0.99);
  return est;
}

PrecisionEstimate precision_monte_carlo(const Classifier& model, const LocalView& view, const Anchor& anchor,
                                        std::size_t n, SeededRng& rng) {
  return precision_monte_carlo(*model.bind(view), view, anchor, n, rng);
}

// ------------------------------------------------------------- Gaussian

double LinearApproxInputs::gamma() const {
  double g = lambda0;
  for (std::size_t j = 0; j < alpha.size(); ++j) g += alpha[j] * mult[j];
  return g;
}

int LinearApproxInputs::length() const { return std::accumulate(mult.begin(), mult.end(), 0); }

int LinearApproxInputs::anchor_length() const { return std::accumulate(anchor.begin(), anchor.end(), 0); }

LinearApproxInputs linear_inputs(std::vector<double> lambda, std::vector<double> idf, std::vector<int> mult,
                                 std::vector<int> anchor, double lambda0) {
  const std::size_t d = lambda.size();
  if (idf.empty()) idf.assign(d, 1.0);
  if (idf.size() != d || mult.size() != d || anchor.size() != d) {
    throw InvalidArgument("linear inputs: column sizes differ");
  }
  LinearApproxInputs in;
  for (std::size_t j = 0; j < d; ++j) {
    if (mult[j] < 1 || anchor[j] < 0 || anchor[j] > mult[j]) {
      throw InvalidArgument("linear inputs: need 0 <= a_j <= m_j and m_j >= 1");
    }
    in.alpha.push_back(lambda[j] * idf[j]);
  }
  in.lambda = std::move(lambda);
  in.idf = std::move(idf);
  in.mult = std::move(mult);
  in.anchor = std::move(anchor);
  in.lambda0 = lambda0;
  return in;
}

LinearApproxInputs linear_inputs(const LinearClassifier& model, const LocalView& view, const Anchor& anchor) {
  if (anchor.counts.size() != view.size()) throw InvalidArgument("anchor and view sizes differ");
  std::vector<double> lambda;
  for (const auto& w : view.words) lambda.push_back(model.coefficient(w));
  return linear_inputs(std::move(lambda), view.idf, view.mult, anchor.counts, model.intercept());
}

double phi_bar(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

std::optional<double> LStatistic::value() const {
  if (!(denominator > 0.0)) return std::nullopt;
  return numerator / denominator;
}

LStatistic linear_L_parts(const LinearApproxInputs& in) {
  double num = -in.lambda0;
  double var = 0.0;
  for (std::size_t j = 0; j < in.alpha.size(); ++j) {
    num -= 0.5 * in.alpha[j] * (in.mult[j] + in.anchor[j]);
    var += 0.25 * in.alpha[j] * in.alpha[j] * (in.mult[j] - in.anchor[j]);
  }
  return {num, std::sqrt(var)};
}

LStatistic normalized_L_parts(const LinearApproxInputs& in) {
  double norm_sq = 0.0;
  double dot = 0.0;
  double var = 0.0;
  for (std::size_t j = 0; j < in.alpha.size(); ++j) {
    const double s = in.mult[j] + in.anchor[j];
    const double diff = in.mult[j] - in.anchor[j];
    const double idf2 = in.idf[j] * in.idf[j];
    norm_sq += (s * s + diff) * idf2;
    dot += in.alpha[j] * s;
    var += in.alpha[j] * in.alpha[j] * diff;
  }
  return {-in.lambda0 * std::sqrt(norm_sq) - dot, std::sqrt(var)};
}

std::optional<double> linear_L(const LinearApproxInputs& in) { return linear_L_parts(in).value(); }

std::optional<double> normalized_L(const LinearApproxInputs& in) { return normalized_L_parts(in).value(); }

double berry_esseen_bound(const LinearApproxInputs& in) {
  if (in.alpha.empty()) throw InvalidArgument("berry-esseen bound needs at least one word");
  double max_a2 = 0.0, min_a2 = INFINITY;
  int max_m = 0, min_m = INT32_MAX;
  for (std::size_t j = 0; j < in.alpha.size(); ++j) {
    const double a2 = in.alpha[j] * in.alpha[j];
    if (a2 == 0.0) throw PreconditionError("berry-esseen bound requires every lambda_j * idf_j to be nonzero");
    max_a2 = std::max(max_a2, a2);
    min_a2 = std::min(min_a2, a2);
    max_m = std::max(max_m, in.mult[j]);
    min_m = std::min(min_m, in.mult[j]);
  }
  const double ratio = max_a2 / min_a2;
  const double mratio = static_cast<double>(max_m) / min_m;
  return kBerryEsseenConstant * std::pow(ratio, 1.5) * std::pow(mratio, 1.5) /
         std::sqrt(static_cast<double>(in.alpha.size()));
}

namespace {

PrecisionEstimate gaussian_from(const LStatistic& parts, const LinearApproxInputs& in, bool with_bound) {
  PrecisionEstimate est;
  if (auto L = parts.value()) {
    est.value = phi_bar(*L);
    est.method = PrecisionMethod::gaussian;
    if (with_bound) {
      const bool all_nonzero = std::all_of(in.alpha.begin(), in.alpha.end(), [](double a) { return a != 0.0; });
      if (all_nonzero) est.error_bound = berry_esseen_bound(in);
    }
    if (2 * in.anchor_length() > in.length()) {
      est.warning = "anchor longer than half the document; the Gaussian approximation is outside its validity range";
    }
  } else {
    // Zero variance: the perturbed margin is deterministic.
    est.value = parts.numerator < 0.0 ? 1.0 : 0.0;
    est.method = PrecisionMethod::exact;
  }
  return est;
}

}  // namespace

PrecisionEstimate gaussian_precision(const LinearApproxInputs& in) {
  return gaussian_from(linear_L_parts(in), in, true);
}

PrecisionEstimate gaussian_precision_normalized(const LinearApproxInputs& in) {
  return gaussian_from(normalized_L_parts(in), in, false);
}

}  // namespace anchor_forge
