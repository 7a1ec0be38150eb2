#include "anchor_forge/anchors.hpp"

#include <algorithm>
#include <cmath>

#include "anchor_forge/errors.hpp"
#include "anchor_forge/parallel.hpp"

namespace anchor_forge {

ExactPrecision::ExactPrecision(const Classifier& model, const LocalView& view, double cutoff)
    : view_(view), bound_(model.bind(view_)), cutoff_(cutoff) {}

double ExactPrecision::evaluate(const Anchor& anchor) const {
  return precision_exact(*bound_, view_, anchor, cutoff_).value;
}

ClosedFormPrecision::ClosedFormPrecision(const PresenceRule& model, const LocalView& view)
    : model_(model), view_(view) {}

double ClosedFormPrecision::evaluate(const Anchor& anchor) const {
  return precision_rule_closed_form(model_, view_, anchor).value;
}

MonteCarloPrecision::MonteCarloPrecision(const Classifier& model, const LocalView& view, std::size_t n,
                                         std::uint64_t master_seed)
    : view_(view), bound_(model.bind(view_)), n_(n), master_(master_seed) {
  if (n < 1) throw InvalidArgument("monte carlo evaluation needs n >= 1");
}

double MonteCarloPrecision::evaluate(const Anchor& anchor) const {
  SeededRng rng = master_.derive(anchor.counts);
  return precision_monte_carlo(*bound_, view_, anchor, n_, rng).value;
}

GaussianPrecision::GaussianPrecision(const LinearClassifier& model, const LocalView& view, bool normalized)
    : base_(linear_inputs(model, view, Anchor{std::vector<int>(view.size(), 0)})), normalized_(normalized) {}

double GaussianPrecision::evaluate(const Anchor& anchor) const {
  LinearApproxInputs in = base_;
  in.anchor = anchor.counts;
  return normalized_ ? gaussian_precision_normalized(in).value : gaussian_precision(in).value;
}

FunctionEvaluation::FunctionEvaluation(std::function<double(const Anchor&)> fn, std::string name)
    : fn_(std::move(fn)), name_(std::move(name)) {}

TableEvaluation::TableEvaluation(std::map<Anchor, double> table, std::string name)
    : table_(std::move(table)), name_(std::move(name)) {}

double TableEvaluation::evaluate(const Anchor& anchor) const {
  auto it = table_.find(anchor);
  return it == table_.end() ? 0.0 : it->second;
}

EvalKind eval_kind_from_string(std::string_view name) {
  if (name == "exact") return EvalKind::exact;
  if (name == "closed_form") return EvalKind::closed_form;
  if (name == "monte_carlo") return EvalKind::monte_carlo;
  if (name == "gaussian") return EvalKind::gaussian;
  if (name == "gaussian_normalized") return EvalKind::gaussian_normalized;
  throw InvalidArgument("unknown evaluation function '" + std::string(name) + "'");
}

std::string_view to_string(EvalKind kind) {
  switch (kind) {
    case EvalKind::exact: return "exact";
    case EvalKind::closed_form: return "closed_form";
    case EvalKind::monte_carlo: return "monte_carlo";
    case EvalKind::gaussian: return "gaussian";
    case EvalKind::gaussian_normalized: return "gaussian_normalized";
  }
  return "exact";
}

std::unique_ptr<EvaluationFunction> make_evaluation(EvalKind kind, const Classifier& model, const LocalView& view,
                                                    std::size_t n_samples, std::uint64_t seed) {
  switch (kind) {
    case EvalKind::exact:
      return std::make_unique<ExactPrecision>(model, view);
    case EvalKind::closed_form:
      if (const auto* rule = dynamic_cast<const PresenceRule*>(&model)) {
        return std::make_unique<ClosedFormPrecision>(*rule, view);
      }
      throw InvalidArgument("closed_form evaluation requires a presence rule model");
    case EvalKind::monte_carlo:
      return std::make_unique<MonteCarloPrecision>(model, view, n_samples, seed);
    case EvalKind::gaussian:
    case EvalKind::gaussian_normalized:
      if (const auto* linear = dynamic_cast<const LinearClassifier*>(&model)) {
        return std::make_unique<GaussianPrecision>(*linear, view, kind == EvalKind::gaussian_normalized);
      }
      throw InvalidArgument("gaussian evaluation requires a linear model");
  }
  throw InvalidArgument("unknown evaluation kind");
}

double anchor_space_size(const LocalView& view) {
  double size = 1.0;
  for (int m : view.mult) size *= m + 1;
  return size - 1.0;
}

namespace {

void check_space(const LocalView& view, double cutoff) {
  const double size = anchor_space_size(view);
  if (size > cutoff) {
    throw SearchSpaceError("anchor space has " + std::to_string(static_cast<long long>(size)) +
                           " candidates (cutoff " + std::to_string(static_cast<long long>(cutoff)) +
                           "); cap per-word multiplicities (--cap) to shrink it");
  }
}

// Colex order with a fixed total: recurse from the last index (slowest) down
// to index 0, whose count is then forced.
void fill_level(const LocalView& view, const std::vector<int>& suffix_cap, int index, int remaining,
                std::vector<int>& counts, std::vector<Anchor>& out) {
  if (index == 0) {
    if (remaining <= view.mult[0]) {
      counts[0] = remaining;
      out.push_back(Anchor{counts});
      counts[0] = 0;
    }
    return;
  }
  const auto i = static_cast<std::size_t>(index);
  const int hi = std::min(view.mult[i], remaining);
  for (int c = 0; c <= hi; ++c) {
    if (remaining - c > suffix_cap[i - 1]) continue;
    counts[i] = c;
    fill_level(view, suffix_cap, index - 1, remaining - c, counts, out);
  }
  counts[i] = 0;
}

// Coefficient of x^length in prod_j (1 + x + ... + x^m_j).
double count_anchors_of_length(const LocalView& view, int length) {
  std::vector<double> poly{1.0};
  for (int m : view.mult) {
    std::vector<double> next(poly.size() + static_cast<std::size_t>(m), 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      for (int c = 0; c <= m; ++c) next[i + static_cast<std::size_t>(c)] += poly[i];
    }
    poly = std::move(next);
  }
  return length >= 0 && static_cast<std::size_t>(length) < poly.size() ? poly[static_cast<std::size_t>(length)] : 0.0;
}

std::vector<double> evaluate_all(const EvaluationFunction& p, const std::vector<Anchor>& anchors,
                                 std::size_t threads) {
  std::vector<double> values(anchors.size());
  parallel_for(anchors.size(), [&](std::size_t i) { values[i] = p.evaluate(anchors[i]); }, threads);
  return values;
}

}  // namespace

std::vector<Anchor> enumerate_anchors(const LocalView& view, double cutoff) {
  check_space(view, cutoff);
  std::vector<Anchor> out;
  if (view.size() == 0) return out;
  out.reserve(static_cast<std::size_t>(anchor_space_size(view)));
  std::vector<int> counts(view.size(), 0);
  while (true) {
    std::size_t i = 0;
    for (; i < counts.size(); ++i) {
      if (counts[i] < view.mult[i]) {
        ++counts[i];
        break;
      }
      counts[i] = 0;
    }
    if (i == counts.size()) break;
    out.push_back(Anchor{counts});
  }
  return out;
}

std::vector<Anchor> enumerate_anchors_of_length(const LocalView& view, int length) {
  std::vector<Anchor> out;
  if (view.size() == 0 || length < 1) return out;
  // suffix_cap[i] = m_0 + ... + m_i
  std::vector<int> cap(view.size());
  int running = 0;
  for (std::size_t i = 0; i < view.size(); ++i) cap[i] = running += view.mult[i];
  if (length > running) return out;
  std::vector<int> counts(view.size(), 0);
  fill_level(view, cap, static_cast<int>(view.size()) - 1, length, counts, out);
  return out;
}

SelectionTrace exhaustive_p_anchors(const LocalView& view, const EvaluationFunction& p, double epsilon,
                                    SeededRng& rng, const SearchOptions& options) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("epsilon must lie in (0, 1)");
  if (view.size() == 0) throw EmptyDocumentError("cannot explain an empty document");
  const double threshold = 1.0 - epsilon;

  SelectionTrace trace;
  trace.epsilon = epsilon;
  trace.evaluation = p.name();

  if (options.prune && !options.dump_space) {
    trace.a1_complete = false;
    const int b = view.length();
    for (int len = 1; len <= b && trace.a2.empty(); ++len) {
      if (static_cast<double>(trace.evaluated) + count_anchors_of_length(view, len) > options.cutoff) {
        throw SearchSpaceError("level-wise search would visit more than " +
                               std::to_string(static_cast<long long>(options.cutoff)) +
                               " anchors; cap per-word multiplicities (--cap) to shrink the space");
      }
      const auto level = enumerate_anchors_of_length(view, len);
      const auto values = evaluate_all(p, level, options.threads);
      trace.evaluated += level.size();
      for (std::size_t i = 0; i < level.size(); ++i) {
        if (values[i] >= threshold) trace.a2.push_back({level[i], values[i]});
      }
      if (len == b) trace.a1_complete = true;
    }
    trace.a1_size = trace.a2.size();
  } else {
    const auto all = enumerate_anchors(view, options.cutoff);  // checks the space size
    const auto values = evaluate_all(p, all, options.threads);
    trace.evaluated = all.size();
    int best_len = 0;
    for (std::size_t i = 0; i < all.size(); ++i) {
      if (values[i] < threshold) continue;
      ++trace.a1_size;
      const int len = all[i].length();
      if (best_len == 0 || len < best_len) {
        best_len = len;
        trace.a2.clear();
      }
      if (len == best_len) trace.a2.push_back({all[i], values[i]});
    }
    if (options.dump_space) {
      trace.space.emplace();
      trace.space->reserve(all.size());
      for (std::size_t i = 0; i < all.size(); ++i) trace.space->push_back({all[i], values[i]});
    }
  }

  if (trace.a2.empty()) {
    throw PreconditionError("no anchor reaches p >= 1 - epsilon; the example is likely not classified positively");
  }
  double best = trace.a2.front().value;
  for (const auto& s : trace.a2) best = std::max(best, s.value);
  for (const auto& s : trace.a2) {
    if (s.value >= best - kTieTolerance) trace.a3.push_back(s);
  }
  trace.tie_count = trace.a3.size();
  const auto pick = static_cast<std::size_t>(rng.uniform_below(trace.a3.size()));
  trace.chosen = trace.a3[pick].anchor;
  trace.chosen_value = trace.a3[pick].value;
  return trace;
}

SelectionTrace empirical_anchors(const LocalView& view, const Classifier& model, double epsilon, std::size_t n,
                                 SeededRng& rng, const SearchOptions& options) {
  const std::uint64_t master = rng.next_u64();
  MonteCarloPrecision p(model, view, n, master);
  return exhaustive_p_anchors(view, p, epsilon, rng, options);
}

StabilityReport check_stability(const EvaluationFunction& p, const EvaluationFunction& q, const LocalView& view,
                                double epsilon, SeededRng& rng, const SearchOptions& options) {
  const auto all = enumerate_anchors(view, options.cutoff);
  const auto pv = evaluate_all(p, all, options.threads);
  const auto qv = evaluate_all(q, all, options.threads);
  std::map<Anchor, double> p_table, q_table;
  StabilityReport report;
  for (std::size_t i = 0; i < all.size(); ++i) {
    report.delta = std::max(report.delta, std::abs(pv[i] - qv[i]));
    p_table.emplace(all[i], pv[i]);
    q_table.emplace(all[i], qv[i]);
  }
  report.delta_small = report.delta < epsilon / 4.0;

  TableEvaluation p_eval(std::move(p_table), p.name());
  SearchOptions full = options;
  full.prune = false;
  full.dump_space = false;
  const SelectionTrace p_trace = exhaustive_p_anchors(view, p_eval, epsilon, rng, full);
  report.a_star = p_trace.chosen;
  report.hypothesis_i = p_trace.chosen_value >= 1.0 - epsilon / 4.0;
  report.hypothesis_ii = true;
  for (const auto& s : p_trace.a2) {
    if (s.anchor != report.a_star && s.value > 1.0 - 3.0 * epsilon / 4.0) report.hypothesis_ii = false;
  }
  if (!report.hypotheses_met()) return report;

  TableEvaluation q_eval(std::move(q_table), q.name());
  const SelectionTrace q_trace = exhaustive_p_anchors(view, q_eval, epsilon - report.delta, rng, full);
  report.a_q = q_trace.chosen;
  report.passed = q_trace.chosen == report.a_star;
  return report;
}

}  // namespace anchor_forge
