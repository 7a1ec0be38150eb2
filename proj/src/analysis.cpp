#include "anchor_forge/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "anchor_forge/errors.hpp"

namespace anchor_forge {

int breakpoint(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("breakpoint: epsilon must lie in (0, 1)");
  int b = 0;
  while (std::ldexp(epsilon, b + 1) <= 1.0) ++b;
  return b;
}

Anchor predict_rule_anchor(const PresenceRule& model, const LocalView& view, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("epsilon must lie in (0, 1)");
  std::vector<std::size_t> required;
  for (const auto& word : model.required_words()) {
    auto j = view.index_of(word);
    if (!j || view.idf[*j] <= 0.0) {
      throw PreconditionError("required word '" + word + "' is absent, so the example is not classified positively");
    }
    required.push_back(*j);
  }
  // Highest multiplicity first.
  std::sort(required.begin(), required.end(),
            [&](std::size_t x, std::size_t y) { return view.mult[x] > view.mult[y]; });
  for (std::size_t i = 1; i < required.size(); ++i) {
    if (view.mult[required[i]] == view.mult[required[i - 1]]) {
      throw PreconditionError("required multiplicities must be pairwise distinct");
    }
  }
  const std::size_t k = required.size();
  const double threshold = 1.0 - epsilon;
  std::size_t c0 = k;
  for (std::size_t c = 1; c <= k; ++c) {
    double prec = 1.0;
    for (std::size_t l = 0; l < k - c; ++l) prec *= 1.0 - std::ldexp(1.0, -view.mult[required[l]]);
    if (prec >= threshold) {
      c0 = c;
      break;
    }
  }
  Anchor out{std::vector<int>(view.size(), 0)};
  for (std::size_t l = k - c0; l < k; ++l) out.counts[required[l]] = 1;
  return out;
}

std::vector<std::string> linear_prediction_violations(const LinearClassifier& model, const LocalView& view) {
  std::vector<std::string> issues;
  const auto in = linear_inputs(model, view, Anchor{std::vector<int>(view.size(), 0)});
  std::vector<double> sorted = in.alpha;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    issues.emplace_back("lambda_j * idf_j values are not pairwise distinct");
  }
  if (sorted.empty() || sorted.back() <= 0.0) issues.emplace_back("no word has lambda_j * idf_j > 0");
  const double gamma = in.gamma();
  if (!(gamma > 0.0)) issues.emplace_back("gamma <= 0: the example is not classified positively");
  if (!(in.lambda0 > -gamma / 2.0)) issues.emplace_back("lambda0 <= -gamma / 2");
  return issues;
}

Anchor predict_linear_anchor(const LinearClassifier& model, const LocalView& view, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("epsilon must lie in (0, 1)");
  if (view.size() == 0) throw EmptyDocumentError("cannot explain an empty document");
  const auto issues = linear_prediction_violations(model, view);
  if (!issues.empty()) throw PreconditionError("greedy linear prediction: " + issues.front());

  auto in = linear_inputs(model, view, Anchor{std::vector<int>(view.size(), 0)});
  std::vector<std::size_t> order(view.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return in.alpha[x] > in.alpha[y]; });
  const double threshold = 1.0 - epsilon;
  for (std::size_t j : order) {
    for (int occ = 0; occ < view.mult[j]; ++occ) {
      ++in.anchor[j];
      if (gaussian_precision(in).value >= threshold) return Anchor{in.anchor};
    }
  }
  throw PreconditionError("greedy linear prediction: even the full anchor misses the threshold");
}

std::set<std::string> RankedWords::top(std::size_t k) const {
  std::set<std::string> out;
  for (std::size_t i = 0; i < k && i < words.size(); ++i) out.insert(words[i]);
  return out;
}

RankedWords gradient_idf_ranking(const Classifier& model, const Document& example, const CorpusStats& stats) {
  if (!model.differentiable()) {
    throw NotDifferentiableError("model '" + model.kind() + "' does not expose an input gradient");
  }
  const LocalView view = local_view(example, stats);
  const auto grad = model.input_gradient(vectorize(example, stats, model.vectorizer()));
  std::vector<std::pair<std::string, double>> scored;
  for (std::size_t j = 0; j < view.size(); ++j) {
    auto it = grad.find(view.words[j]);
    const double g = it == grad.end() ? 0.0 : it->second;
    scored.emplace_back(view.words[j], g * view.idf[j]);
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
  RankedWords out;
  for (auto& [w, s] : scored) {
    out.words.push_back(std::move(w));
    out.scores.push_back(s);
  }
  return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) throw InvalidArgument("jaccard: both sets are empty");
  std::size_t inter = 0;
  for (const auto& w : a) inter += b.count(w);
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<SweepRow> shift_sweep(const LinearClassifier& model, const LocalView& view,
                                  const std::vector<double>& shifts, double epsilon, SeededRng& rng, EvalKind kind,
                                  std::size_t n_samples, const SearchOptions& options) {
  std::vector<SweepRow> rows;
  for (double shift : shifts) {
    SweepRow row;
    row.shift = shift;
    const LinearClassifier shifted = model.shifted(shift);
    row.feasible = shifted.bind(view)->decide(view.mult);
    if (!row.feasible) {
      row.note = "shift flips the prediction to 0";
      rows.push_back(std::move(row));
      continue;
    }
    if (shifted.vectorizer() == VectorizerKind::plain && linear_prediction_violations(shifted, view).empty()) {
      row.predicted = predict_linear_anchor(shifted, view, epsilon);
    }
    const std::uint64_t seed = rng.next_u64();
    const auto eval = make_evaluation(kind, shifted, view, n_samples, seed);
    const SelectionTrace trace = exhaustive_p_anchors(view, *eval, epsilon, rng, options);
    row.chosen = trace.chosen;
    row.precision = trace.chosen_value;
    row.tie_count = trace.tie_count;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows, const LocalView& view) {
  std::ostringstream out;
  out.precision(17);
  out << "shift,anchor,length,precision,feasible,predicted,tie_count\n";
  for (const auto& row : rows) {
    out << row.shift << ',';
    if (row.chosen) {
      out << render_anchor(view, *row.chosen) << ',' << row.chosen->length() << ',' << row.precision;
    } else {
      out << ",,";
    }
    out << ',' << (row.feasible ? 1 : 0) << ',';
    if (row.predicted) out << render_anchor(view, *row.predicted);
    out << ',' << row.tie_count << '\n';
  }
  return out.str();
}

}  // namespace anchor_forge
