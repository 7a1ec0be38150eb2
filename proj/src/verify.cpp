#include "anchor_forge/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "anchor_forge/analysis.hpp"
#include "anchor_forge/anchors.hpp"
#include "anchor_forge/errors.hpp"
#include "anchor_forge/parallel.hpp"
#include "anchor_forge/precision.hpp"
#include "anchor_forge/stats.hpp"

namespace anchor_forge {

using nlohmann::json;

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

const Check& VerifyReport::check(std::string_view name) const {
  for (const auto& c : checks) {
    if (c.name == name) return c;
  }
  throw InvalidArgument("report '" + id + "' has no check named '" + std::string(name) + "'");
}

json VerifyReport::to_json() const {
  json j;
  j["id"] = id;
  j["passed"] = passed();
  json cs = json::array();
  for (const auto& c : checks) cs.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  j["checks"] = std::move(cs);
  j["metrics"] = metrics;
  j["counterexamples"] = counterexamples;
  return j;
}

namespace {

int trials_or(const VerifyOptions& o, int fallback) { return o.trials > 0 ? o.trials : fallback; }

int uniform_int(SeededRng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(hi - lo + 1)));
}

double uniform_real(SeededRng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform01(); }

std::string fmt(double x) {
  std::ostringstream out;
  out.precision(6);
  out << x;
  return out.str();
}

json anchor_json(const LocalView& view, const Anchor& anchor) {
  json j = json::object();
  for (std::size_t i = 0; i < view.size(); ++i) {
    if (anchor.counts[i] > 0) j[view.words[i]] = anchor.counts[i];
  }
  return j;
}

json view_json(const LocalView& view) {
  json words = json::array();
  for (std::size_t i = 0; i < view.size(); ++i) {
    words.push_back({{"word", view.words[i]}, {"mult", view.mult[i]}, {"idf", view.idf[i]}});
  }
  return words;
}

/// Random permutation of [0, n).
std::vector<std::size_t> permutation(std::size_t n, SeededRng& rng) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.uniform_below(i)]);
  return p;
}

Anchor indicator(const LocalView& view, std::initializer_list<std::pair<std::string_view, int>> entries) {
  Anchor a{std::vector<int>(view.size(), 0)};
  for (const auto& [w, c] : entries) a.counts[*view.index_of(w)] = c;
  return a;
}

SearchOptions search_options(const VerifyOptions& o) {
  SearchOptions s;
  s.threads = o.threads;
  return s;
}

struct RuleInstance {
  LocalView view;
  std::set<std::string> required;
};

/// k required words r0.. plus up to `extra` fillers x0.., shuffled.
RuleInstance random_rule_instance(SeededRng& rng, int k, int extra, int max_mult, bool distinct_required) {
  std::vector<std::string> words;
  std::vector<int> mult;
  std::set<std::string> required;
  std::vector<int> pool(static_cast<std::size_t>(max_mult));
  std::iota(pool.begin(), pool.end(), 1);
  for (std::size_t i = pool.size(); i > 1; --i) std::swap(pool[i - 1], pool[rng.uniform_below(i)]);
  for (int i = 0; i < k; ++i) {
    words.push_back("r" + std::to_string(i));
    mult.push_back(distinct_required ? pool[static_cast<std::size_t>(i)] : uniform_int(rng, 1, max_mult));
    required.insert(words.back());
  }
  for (int i = 0; i < extra; ++i) {
    words.push_back("x" + std::to_string(i));
    mult.push_back(uniform_int(rng, 1, 3));
  }
  const auto perm = permutation(words.size(), rng);
  std::vector<std::string> w2;
  std::vector<int> m2;
  std::vector<double> idf;
  for (std::size_t i : perm) {
    w2.push_back(words[i]);
    m2.push_back(mult[i]);
    idf.push_back(uniform_real(rng, 1.0, 5.0));
  }
  return {make_view(std::move(w2), std::move(m2), std::move(idf)), std::move(required)};
}

Anchor random_anchor(const LocalView& view, SeededRng& rng) {
  Anchor a{std::vector<int>(view.size(), 0)};
  for (std::size_t j = 0; j < view.size(); ++j) a.counts[j] = uniform_int(rng, 0, view.mult[j]);
  if (a.length() == 0) a.counts[rng.uniform_below(view.size())] = 1;
  return a;
}

struct LinearInstance {
  LocalView view;
  std::map<std::string, double> lambda;
  double lambda0 = 0.0;
  Anchor anchor;
};

LinearClassifier linear_model(const LinearInstance& inst, VectorizerKind vec = VectorizerKind::plain) {
  return LinearClassifier(inst.lambda, inst.lambda0, Link::none, vec);
}

/// d words, multiplicities 1..max_mult, idf in [1, 5], lambda ~ N(0, 1), and a
/// random anchor with |A| <= b / 2.
LinearInstance random_linear_instance(SeededRng& rng, int d, int max_mult) {
  LinearInstance inst;
  std::vector<std::string> words;
  std::vector<int> mult;
  std::vector<double> idf;
  for (int j = 0; j < d; ++j) {
    words.push_back("w" + std::to_string(j));
    mult.push_back(uniform_int(rng, 1, max_mult));
    idf.push_back(uniform_real(rng, 1.0, 5.0));
    inst.lambda[words.back()] = rng.normal();
  }
  inst.view = make_view(words, mult, idf);
  const int b = inst.view.length();
  inst.anchor.counts.assign(static_cast<std::size_t>(d), 0);
  for (int j = 0; j < d; ++j) {
    if (rng.uniform01() < 0.3) inst.anchor.counts[static_cast<std::size_t>(j)] = uniform_int(rng, 0, mult[static_cast<std::size_t>(j)]);
  }
  while (2 * inst.anchor.length() > b) {
    for (int& a : inst.anchor.counts) {
      if (a > 0) {
        --a;
        break;
      }
    }
  }
  if (inst.anchor.length() == 0) inst.anchor.counts[rng.uniform_below(static_cast<std::uint64_t>(d))] = 1;
  return inst;
}

}  // namespace

// ------------------------------------------------------------------ sampling

VerifyReport verify_sampling_equivalence(const VerifyOptions& options) {
  VerifyReport report;
  report.id = "sampling_equivalence";
  SeededRng rng(options.seed);
  const Document doc = tokenize("The quick brown fox jumps over the lazy dog");
  const PositionalAnchor anchor{{1, 3, 5, 8}};
  const std::size_t copies = 4;
  const auto batches = static_cast<std::size_t>(trials_or(options, 5000));
  const std::size_t b = doc.length();

  std::vector<std::size_t> replaced(b, 0);
  std::vector<std::vector<double>> pos_xy(b, std::vector<double>(b, 0.0));
  // Pooled copy pairs per position: sums of x, y, xy, x^2, y^2 and count.
  std::vector<std::array<double, 6>> copy_pairs(b, std::array<double, 6>{});
  for (std::size_t t = 0; t < batches; ++t) {
    const auto batch = sample_three_step(doc, anchor, copies, rng);
    std::vector<std::vector<int>> x(copies, std::vector<int>(b, 0));
    for (std::size_t c = 0; c < copies; ++c) {
      for (std::size_t k = 0; k < b; ++k) x[c][k] = batch[c].tokens[k] == kUnkToken ? 1 : 0;
    }
    for (std::size_t c = 0; c < copies; ++c) {
      for (std::size_t k = 0; k < b; ++k) {
        replaced[k] += static_cast<std::size_t>(x[c][k]);
        for (std::size_t l = k + 1; l < b; ++l) pos_xy[k][l] += x[c][k] * x[c][l];
      }
    }
    for (std::size_t k = 0; k < b; ++k) {
      for (std::size_t c1 = 0; c1 < copies; ++c1) {
        for (std::size_t c2 = c1 + 1; c2 < copies; ++c2) {
          const double u = x[c1][k], v = x[c2][k];
          auto& s = copy_pairs[k];
          s[0] += u;
          s[1] += v;
          s[2] += u * v;
          s[3] += u * u;
          s[4] += v * v;
          s[5] += 1.0;
        }
      }
    }
  }
  const double total = static_cast<double>(batches * copies);
  double max_freq_dev = 0.0, max_pos_corr = 0.0, max_copy_corr = 0.0;
  std::size_t anchored_hits = 0;
  json freqs = json::object();
  for (std::size_t k = 0; k < b; ++k) {
    const double f = replaced[k] / total;
    freqs[std::to_string(k)] = f;
    if (anchor.kept_positions.count(k)) {
      anchored_hits += replaced[k];
      continue;
    }
    max_freq_dev = std::max(max_freq_dev, std::abs(f - 0.5));
    for (std::size_t l = k + 1; l < b; ++l) {
      if (anchor.kept_positions.count(l)) continue;
      const double fl = replaced[l] / total;
      const double cov = pos_xy[k][l] / total - f * fl;
      const double r = cov / std::sqrt(f * (1 - f) * fl * (1 - fl));
      max_pos_corr = std::max(max_pos_corr, std::abs(r));
    }
    const auto& s = copy_pairs[k];
    const double n = s[5];
    const double mx = s[0] / n, my = s[1] / n;
    const double cov = s[2] / n - mx * my;
    const double r = cov / std::sqrt((s[3] / n - mx * mx) * (s[4] / n - my * my));
    max_copy_corr = std::max(max_copy_corr, std::abs(r));
  }
  report.metrics = {{"samples", total},
                    {"replacement_frequency", freqs},
                    {"max_frequency_deviation", max_freq_dev},
                    {"max_position_correlation", max_pos_corr},
                    {"max_copy_correlation", max_copy_corr},
                    {"anchored_replacements", anchored_hits}};
  report.checks.push_back({"frequency", max_freq_dev <= 0.015, "max |freq - 0.5| = " + fmt(max_freq_dev)});
  report.checks.push_back({"correlation", std::max(max_pos_corr, max_copy_corr) <= 0.025,
                           "max |corr| positions " + fmt(max_pos_corr) + ", copies " + fmt(max_copy_corr)});
  report.checks.push_back(
      {"anchored_never_replaced", anchored_hits == 0, std::to_string(anchored_hits) + " anchored replacements"});
  return report;
}

// ------------------------------------------------------------- presence rule

VerifyReport verify_rule_oracle(const VerifyOptions& options) {
  VerifyReport report;
  report.id = "rule_oracle";
  SeededRng rng(options.seed);
  const int instances = trials_or(options, 200);
  double max_diff = 0.0;
  for (int t = 0; t < instances; ++t) {
    auto inst = random_rule_instance(rng, uniform_int(rng, 1, 4), uniform_int(rng, 0, 2), 6, false);
    const PresenceRule model(inst.required);
    const Anchor a = random_anchor(inst.view, rng);
    const double exact = precision_exact(model, inst.view, a).value;
    const double closed = precision_rule_closed_form(model, inst.view, a).value;
    const double diff = std::abs(exact - closed);
    max_diff = std::max(max_diff, diff);
    if (diff > 1e-12) {
      report.counterexamples.push_back({{"view", view_json(inst.view)},
                                        {"anchor", anchor_json(inst.view, a)},
                                        {"exact", exact},
                                        {"closed_form", closed}});
    }
  }
  report.metrics = {{"instances", instances}, {"max_abs_difference", max_diff}};
  report.checks.push_back({"exact_equals_closed_form", report.counterexamples.empty(),
                           std::to_string(instances) + " instances, max diff " + fmt(max_diff)});
  return report;
}

VerifyReport verify_breakpoint(const VerifyOptions& options) {
  VerifyReport report;
  report.id = "breakpoint";
  const double eps = 0.05;
  const PresenceRule model({"very", "good"});
  std::vector<Document> corpus;
  for (const char* line : {"food is very good", "the food was bland", "service is good", "very slow kitchen"}) {
    corpus.push_back(tokenize(line));
  }
  const CorpusStats stats = fit_corpus(corpus);
  json rows = json::array();
  auto run = [&](int m_very, std::uint64_t seed) {
    std::string text = "food is";
    for (int i = 0; i < m_very; ++i) text += " very";
    text += " good";
    const LocalView view = local_view(tokenize(text), stats);
    SeededRng rng(seed);
    ExactPrecision p(model, view);
    const auto trace = exhaustive_p_anchors(view, p, eps, rng, search_options(options));
    rows.push_back({{"m_very", m_very},
                    {"anchor", anchor_json(view, trace.chosen)},
                    {"precision", trace.chosen_value},
                    {"tie_count", trace.tie_count}});
    return std::make_pair(anchor_word_set(view, trace.chosen), trace.tie_count);
  };
  const auto [four, ties4] = run(4, options.seed);
  const auto [five, ties5] = run(5, options.seed);
  const auto [four_again, ties4b] = run(4, options.seed + 1);
  const auto [five_again, ties5b] = run(5, options.seed + 1);
  report.metrics = {{"breakpoint", breakpoint(eps)}, {"runs", rows}};
  report.checks.push_back({"m4_keeps_both", four == std::set<std::string>{"very", "good"} && ties4 == 1,
                           "m_very = 4 anchor has " + std::to_string(four.size()) + " word(s)"});
  report.checks.push_back({"m5_drops_very", five == std::set<std::string>{"good"} && ties5 == 1,
                           "m_very = 5 anchor has " + std::to_string(five.size()) + " word(s)"});
  report.checks.push_back({"deterministic", four == four_again && five == five_again && ties4b == 1 && ties5b == 1,
                           "independent of the tie-break seed"});
  return report;
}

VerifyReport verify_presence_rule(const VerifyOptions& options) {
  VerifyReport report;
  report.id = "presence_rule";
  VerifyOptions sub = options;
  sub.trials = 0;
  for (const auto& part : {verify_breakpoint(sub), verify_rule_oracle(sub)}) {
    for (const auto& c : part.checks) report.checks.push_back(c);
    report.metrics[part.id] = part.metrics;
    for (const auto& ce : part.counterexamples) report.counterexamples.push_back(ce);
  }

  SeededRng rng(options.seed ^ 0x5eedULL);
  const int wanted = trials_or(options, 100);
  int compared = 0, attempts = 0, mismatches = 0;
  while (compared < wanted && attempts < 50 * wanted) {
    ++attempts;
    auto inst = random_rule_instance(rng, uniform_int(rng, 1, 4), uniform_int(rng, 0, 2), 7, true);
    const double eps = uniform_real(rng, 0.01, 0.3);
    const PresenceRule model(inst.required);
    ExactPrecision p(model, inst.view);
    const auto trace = exhaustive_p_anchors(inst.view, p, eps, rng, search_options(options));
    if (trace.tie_count != 1) continue;
    ++compared;
    const Anchor predicted = predict_rule_anchor(model, inst.view, eps);
    if (predicted != trace.chosen) {
      ++mismatches;
      report.counterexamples.push_back({{"view", view_json(inst.view)},
                                        {"epsilon", eps},
                                        {"predicted", anchor_json(inst.view, predicted)},
                                        {"exhaustive", anchor_json(inst.view, trace.chosen)}});
    }
  }
  report.metrics["prediction"] = {{"compared", compared}, {"attempts", attempts}, {"mismatches", mismatches}};
  report.checks.push_back({"prediction_matches_search", compared == wanted && mismatches == 0,
                           std::to_string(mismatches) + " mismatches over " + std::to_string(compared) +
                               " singleton instances"});
  return report;
}

// ---------------------------------------------------------------- small tree

VerifyReport verify_small_tree(const VerifyOptions& options) {
  VerifyReport report;
  report.id = "small_tree";
  SeededRng rng(options.seed);
  const SmallTree model("w1", "w2", "w3");
  const int instances = trials_or(options, 20);
  int runs = 0, failures = 0;
  for (int t = 0; t < instances; ++t) {
    std::vector<std::string> words{"w1", "w2", "w3"};
    std::vector<int> mult{1, 1, 1};
    if (t > 0) {
      for (int& m : mult) m = uniform_int(rng, 1, 3);
      const int extra = uniform_int(rng, 0, 2);
      for (int e = 0; e < extra; ++e) {
        words.push_back("f" + std::to_string(e));
        mult.push_back(uniform_int(rng, 1, 2));
      }
    }
    const auto perm = permutation(words.size(), rng);
    std::vector<std::string> w;
    std::vector<int> m;
    for (std::size_t i : perm) {
      w.push_back(words[i]);
      m.push_back(mult[i]);
    }
    const LocalView view = make_view(w, m, std::vector<double>(w.size(), 1.0));
    const Anchor expected = indicator(view, {{"w3", 1}});
    ExactPrecision p(model, view);
    for (double eps : {0.01, 0.05, 0.2}) {
      ++runs;
      const auto trace = exhaustive_p_anchors(view, p, eps, rng, search_options(options));
      if (trace.chosen != expected || trace.tie_count != 1) {
        ++failures;
        report.counterexamples.push_back({{"view", view_json(view)},
                                          {"epsilon", eps},
                                          {"chosen", anchor_json(view, trace.chosen)},
                                          {"tie_count", trace.tie_count}});
      }
    }
  }
  report.metrics = {{"runs", runs}, {"failures", failures}};
  report.checks.push_back({"selects_w3", failures == 0,
                           std::to_string(runs - failures) + "/" + std::to_string(runs) + " runs chose (0,0,1)"});
  return report;
}

// --------------------------------------------------------------------- dummy

VerifyReport verify_dummy(const VerifyOptions& options) {
  VerifyReport report;
  report.id = "dummy";
  SeededRng rng(options.seed);
  const int models = trials_or(options, 100);
  const double eps = 0.05;
  int violations = 0, resampled = 0, precision_mismatches = 0;
  for (int t = 0; t < models; ++t) {
    const bool rule = t % 2 == 0;
    while (true) {
      const int d = uniform_int(rng, 2, 5);
      std::vector<std::string> words;
      std::vector<int> mult;
      std::vector<double> idf;
      for (int j = 0; j < d; ++j) {
        words.push_back("w" + std::to_string(j));
        mult.push_back(uniform_int(rng, 1, 3));
        idf.push_back(uniform_real(rng, 1.0, 4.0));
      }
      if (std::accumulate(mult.begin(), mult.end(), 0) > 10) continue;
      const LocalView view = make_view(words, mult, idf);
      const auto dummy = static_cast<std::size_t>(rng.uniform_below(static_cast<std::uint64_t>(d)));
      std::unique_ptr<Classifier> model;
      if (rule) {
        std::set<std::string> required;
        for (int j = 0; j < d; ++j) {
          if (static_cast<std::size_t>(j) != dummy && rng.uniform01() < 0.6) required.insert(words[static_cast<std::size_t>(j)]);
        }
        if (required.empty()) required.insert(words[(dummy + 1) % static_cast<std::size_t>(d)]);
        model = std::make_unique<PresenceRule>(required);
      } else {
        std::map<std::string, double> lambda;
        double s = 0.0;
        for (int j = 0; j < d; ++j) {
          const auto ju = static_cast<std::size_t>(j);
          lambda[words[ju]] = ju == dummy ? 0.0 : rng.normal();
          s += lambda[words[ju]] * idf[ju] * mult[ju];
        }
        const double lambda0 = -s + uniform_real(rng, 0.05, 2.0);
        model = std::make_unique<LinearClassifier>(lambda, lambda0);
        // The dummy-only anchor has the precision of the empty anchor; when that
        // already meets the threshold it ties with other length-one anchors.
        Anchor only_dummy{std::vector<int>(view.size(), 0)};
        only_dummy.counts[dummy] = 1;
        if (precision_exact(*model, view, only_dummy).value >= 1.0 - eps) {
          ++resampled;
          continue;
        }
      }
      ExactPrecision p(*model, view);
      const auto trace = exhaustive_p_anchors(view, p, eps, rng, search_options(options));
      bool bad = false;
      for (const auto& s : trace.a3) bad = bad || s.anchor.counts[dummy] > 0;
      if (bad) {
        ++violations;
        report.counterexamples.push_back({{"model", json::parse(model->to_json())},
                                          {"view", view_json(view)},
                                          {"dummy", words[dummy]},
                                          {"chosen", anchor_json(view, trace.chosen)}});
      }
      // Removing the dummy word from the view leaves the chosen anchor's
      // precision unchanged.
      std::vector<std::string> w2;
      std::vector<int> m2, a2;
      std::vector<double> i2;
      for (std::size_t j = 0; j < view.size(); ++j) {
        if (j == dummy) continue;
        w2.push_back(view.words[j]);
        m2.push_back(view.mult[j]);
        i2.push_back(view.idf[j]);
        a2.push_back(trace.chosen.counts[j]);
      }
      if (std::accumulate(a2.begin(), a2.end(), 0) > 0) {
        const LocalView reduced = make_view(w2, m2, i2);
        const double with = trace.chosen_value;
        const double without = precision_exact(*model, reduced, Anchor{a2}).value;
        if (std::abs(with - without) > 1e-12) ++precision_mismatches;
      }
      break;
    }
  }
  report.metrics = {{"models", models},
                    {"violations", violations},
                    {"resampled_linear_instances", resampled},
                    {"precision_mismatches", precision_mismatches}};
  report.checks.push_back({"no_dummy_in_anchor", violations == 0,
                           std::to_string(violations) + " violations over " + std::to_string(models) + " models"});
  report.checks.push_back({"dummy_leaves_precision_unchanged", precision_mismatches == 0,
                           std::to_string(precision_mismatches) + " precision changes"});
  return report;
}

// ------------------------------------------------------------- gaussian fit

VerifyReport verify_gaussian_fit(const VerifyOptions& options) {
  VerifyReport report;
  report.id = "gaussian_fit";
  SeededRng rng(options.seed);
  const int instances = trials_or(options, 50);
  const std::size_t n = 1000000;
  double max_gap = 0.0, sum_gap = 0.0;
  int over_tol = 0, over_bound = 0, bound_checked = 0;
  json rows = json::array();
  for (int t = 0; t < instances; ++t) {
    LinearInstance inst;
    LinearApproxInputs in;
    while (true) {
      inst = random_linear_instance(rng, 30, 10);
      in = linear_inputs(linear_model(inst), inst.view, inst.anchor);
      in.lambda0 = 0.0;
      const auto parts = linear_L_parts(in);
      const double target = uniform_real(rng, -2.5, 1.0);
      inst.lambda0 = parts.numerator - target * parts.denominator;
      in.lambda0 = inst.lambda0;
      if (in.gamma() > 0.0) break;
    }
    const auto model = linear_model(inst);
    const auto gauss = gaussian_precision(in);
    SeededRng mc_rng = rng.derive(static_cast<std::uint64_t>(t));
    const double mc = precision_monte_carlo(model, inst.view, inst.anchor, n, mc_rng).value;
    const double gap = std::abs(mc - gauss.value);
    const double bound = berry_esseen_bound(in);
    max_gap = std::max(max_gap, gap);
    sum_gap += gap;
    if (gap > 0.02) ++over_tol;
    if (bound < 1.0) {
      ++bound_checked;
      if (gap > bound) ++over_bound;
    }
    rows.push_back({{"L", *linear_L(in)}, {"gaussian", gauss.value}, {"monte_carlo", mc}, {"berry_esseen", bound}});
    if (gap > 0.02 || (bound < 1.0 && gap > bound)) {
      report.counterexamples.push_back({{"view", view_json(inst.view)},
                                        {"anchor", anchor_json(inst.view, inst.anchor)},
                                        {"lambda0", inst.lambda0},
                                        {"gaussian", gauss.value},
                                        {"monte_carlo", mc}});
    }
  }
  report.metrics = {{"instances", instances},
                    {"n_samples", n},
                    {"max_gap", max_gap},
                    {"mean_gap", sum_gap / instances},
                    {"non_vacuous_bounds", bound_checked},
                    {"rows", rows}};
  report.checks.push_back({"gap_within_0.02", over_tol == 0,
                           "max |MC - Phi_bar(L)| = " + fmt(max_gap) + " over " + std::to_string(instances)});
  report.checks.push_back({"gap_within_berry_esseen", over_bound == 0,
                           std::to_string(bound_checked) + " non-vacuous bounds, " + std::to_string(over_bound) +
                               " exceeded"});
  return report;
}

// ------------------------------------------------------ linear maximization

VerifyReport verify_linear_maximization(const VerifyOptions& options) {
  VerifyReport report;
  report.id = "linear_maximization";
  SeededRng rng(options.seed);
  const int wanted = trials_or(options, 100);
  const double eps = 0.05;
  int compared = 0, attempts = 0, mismatches = 0, negative = 0, ties_skipped = 0;
  while (compared < wanted && attempts < 100 * wanted) {
    ++attempts;
    const int d = uniform_int(rng, 3, 7);
    LinearInstance inst = random_linear_instance(rng, d, 4);
    if (anchor_space_size(inst.view) > 1e5) continue;
    auto in = linear_inputs(linear_model(inst), inst.view, Anchor{std::vector<int>(inst.view.size(), 0)});
    in.lambda0 = 0.0;
    const double s = in.gamma();
    double sd = 0.0;
    for (std::size_t j = 0; j < in.alpha.size(); ++j) sd += 0.25 * in.alpha[j] * in.alpha[j] * in.mult[j];
    sd = std::sqrt(sd);
    const double lower = std::max(-s / 3.0, -s) + 1e-9;
    inst.lambda0 = lower + uniform_real(rng, 0.0, 1.0) * sd;
    const auto model = linear_model(inst);
    if (!linear_prediction_violations(model, inst.view).empty()) continue;
    GaussianPrecision p(model, inst.view);
    const auto trace = exhaustive_p_anchors(inst.view, p, eps, rng, search_options(options));
    if (trace.tie_count != 1) {
      ++ties_skipped;
      continue;
    }
    ++compared;
    const Anchor greedy = predict_linear_anchor(model, inst.view, eps);
    bool neg = false;
    for (std::size_t j = 0; j < inst.view.size(); ++j) {
      if (trace.chosen.counts[j] > 0 && model.coefficient(inst.view.words[j]) <= 0.0) neg = true;
    }
    const bool mismatch = greedy != trace.chosen;
    mismatches += mismatch ? 1 : 0;
    negative += neg ? 1 : 0;
    if (mismatch || neg) {
      report.counterexamples.push_back({{"view", view_json(inst.view)},
                                        {"lambda", inst.lambda},
                                        {"lambda0", inst.lambda0},
                                        {"greedy", anchor_json(inst.view, greedy)},
                                        {"greedy_value", p.evaluate(greedy)},
                                        {"exhaustive", anchor_json(inst.view, trace.chosen)},
                                        {"exhaustive_value", trace.chosen_value}});
    }
  }
  report.metrics = {{"compared", compared},
                    {"attempts", attempts},
                    {"tie_skipped", ties_skipped},
                    {"mismatches", mismatches},
                    {"negative_inclusions", negative}};
  report.checks.push_back({"greedy_equals_exhaustive", compared == wanted && mismatches == 0,
                           std::to_string(mismatches) + " mismatches over " + std::to_string(compared)});
  report.checks.push_back({"no_nonpositive_words", compared == wanted && negative == 0,
                           std::to_string(negative) + " anchors with lambda_j <= 0"});
  return report;
}

// ------------------------------------------------------------ normalized fit

VerifyReport verify_normalized_fit(const VerifyOptions& options) {
  VerifyReport report;
  report.id = "normalized_fit";
  SeededRng rng(options.seed);
  const int instances = trials_or(options, 50);
  const std::size_t n = 1000000;
  const double eps = 0.05;
  double max_gap = 0.0;
  int over_tol = 0, selection_mismatch = 0;
  SearchOptions search = search_options(options);
  search.cutoff = 2e6;
  for (int t = 0; t < instances; ++t) {
    LinearInstance inst;
    while (true) {
      inst = random_linear_instance(rng, 20, 5);
      inst.lambda0 = 0.0;
      auto in = linear_inputs(linear_model(inst), inst.view, inst.anchor);
      if (in.gamma() <= 0.0) {
        for (auto& [w, l] : inst.lambda) l = -l;
      }
      // Keep instances whose level-wise search stays small.
      const auto plain_model = linear_model(inst);
      GaussianPrecision probe(plain_model, inst.view);
      try {
        SeededRng probe_rng(0);
        exhaustive_p_anchors(inst.view, probe, eps, probe_rng, search);
      } catch (const SearchSpaceError&) {
        continue;
      }
      break;
    }
    const auto plain_model = linear_model(inst);
    const auto norm_model = linear_model(inst, VectorizerKind::normalized);
    const auto in = linear_inputs(norm_model, inst.view, inst.anchor);
    const double approx = gaussian_precision_normalized(in).value;
    SeededRng mc_rng = rng.derive(static_cast<std::uint64_t>(t));
    const double mc = precision_monte_carlo(norm_model, inst.view, inst.anchor, n, mc_rng).value;
    const double gap = std::abs(approx - mc);
    max_gap = std::max(max_gap, gap);
    if (gap > 0.03) ++over_tol;

    GaussianPrecision p_norm(norm_model, inst.view, true);
    GaussianPrecision p_plain(plain_model, inst.view, false);
    const std::uint64_t tie_seed = rng.next_u64();
    SeededRng r1(tie_seed), r2(tie_seed);
    const auto t_norm = exhaustive_p_anchors(inst.view, p_norm, eps, r1, search);
    const auto t_plain = exhaustive_p_anchors(inst.view, p_plain, eps, r2, search);
    const bool same = t_norm.chosen == t_plain.chosen;
    if (!same) ++selection_mismatch;
    if (gap > 0.03 || !same) {
      report.counterexamples.push_back({{"view", view_json(inst.view)},
                                        {"anchor", anchor_json(inst.view, inst.anchor)},
                                        {"approx", approx},
                                        {"monte_carlo", mc},
                                        {"normalized_choice", anchor_json(inst.view, t_norm.chosen)},
                                        {"plain_choice", anchor_json(inst.view, t_plain.chosen)}});
    }
  }
  report.metrics = {{"instances", instances}, {"n_samples", n}, {"max_gap", max_gap},
                    {"selection_mismatches", selection_mismatch}};
  report.checks.push_back({"gap_within_0.03", over_tol == 0, "max gap " + fmt(max_gap)});
  report.checks.push_back({"selection_matches_plain", selection_mismatch == 0,
                           std::to_string(selection_mismatch) + " selection mismatches"});
  return report;
}

// --------------------------------------------------- concentration/stability

VerifyReport verify_concentration_stability(const VerifyOptions& options) {
  VerifyReport report;
  report.id = "concentration_stability";
  const double eps = 0.05;
  const int b = 8;
  const double delta = eps / 8.0;
  const std::size_t n = hoeffding_sample_size(b, delta, 0.01);

  struct Instance {
    std::string name;
    LocalView view;
    std::set<std::string> rule;
  };
  auto view_of = [](std::vector<std::string> w, std::vector<int> m) {
    return make_view(w, m, std::vector<double>(w.size(), 1.0));
  };
  const std::vector<Instance> instances{
      {"pair", view_of({"filler", "u", "v"}, {6, 1, 1}), {"u", "v"}},
      {"repeated", view_of({"u", "v"}, {7, 1}), {"u", "v"}},
      {"triple", view_of({"u", "v", "w", "filler"}, {3, 2, 1, 2}), {"u", "v", "w"}},
  };

  // Exact tables and the exact selection (must be a singleton).
  std::vector<std::map<Anchor, double>> exact_tables;
  std::vector<Anchor> exact_choice;
  bool singleton = true;
  for (const auto& inst : instances) {
    const PresenceRule model(inst.rule);
    ExactPrecision p(model, inst.view);
    std::map<Anchor, double> table;
    for (const auto& a : enumerate_anchors(inst.view)) table.emplace(a, p.evaluate(a));
    SeededRng tie(options.seed);
    const auto trace = exhaustive_p_anchors(inst.view, TableEvaluation(table, "exact"), eps, tie);
    singleton = singleton && trace.tie_count == 1;
    exact_tables.push_back(std::move(table));
    exact_choice.push_back(trace.chosen);
  }

  const int trials = trials_or(options, 500);
  int agree = 0, within_delta = 0, hyp_met = 0, stable = 0;
  double max_sup = 0.0;
  SeededRng master(options.seed);
  for (int t = 0; t < trials; ++t) {
    const std::size_t which = static_cast<std::size_t>(t) % instances.size();
    const auto& inst = instances[which];
    const PresenceRule model(inst.rule);
    SeededRng trial_rng = master.derive(static_cast<std::uint64_t>(t));
    MonteCarloPrecision q(model, inst.view, n, trial_rng.next_u64());
    const auto all = enumerate_anchors(inst.view);
    std::vector<double> values(all.size());
    parallel_for(all.size(), [&](std::size_t i) { values[i] = q.evaluate(all[i]); }, options.threads);
    std::map<Anchor, double> q_table;
    double sup = 0.0;
    for (std::size_t i = 0; i < all.size(); ++i) {
      q_table.emplace(all[i], values[i]);
      sup = std::max(sup, std::abs(values[i] - exact_tables[which].at(all[i])));
    }
    max_sup = std::max(max_sup, sup);
    if (sup <= delta) ++within_delta;

    // Empirical Anchors: per-anchor streams make the table and a fresh
    // Monte-Carlo search identical.
    const TableEvaluation q_eval(q_table, "monte_carlo");
    const auto trace = exhaustive_p_anchors(inst.view, q_eval, eps, trial_rng);
    if (trace.chosen == exact_choice[which]) {
      ++agree;
    } else if (report.counterexamples.size() < 20) {
      report.counterexamples.push_back({{"trial", t},
                                        {"instance", inst.name},
                                        {"empirical", anchor_json(inst.view, trace.chosen)},
                                        {"exact", anchor_json(inst.view, exact_choice[which])}});
    }

    const TableEvaluation p_eval(exact_tables[which], "exact");
    const auto stab = check_stability(p_eval, q_eval, inst.view, eps, trial_rng);
    if (stab.hypotheses_met()) {
      ++hyp_met;
      if (stab.passed.value_or(false)) ++stable;
    }
  }

  // Deterministic perturbation: q = p + noise with amplitude below epsilon / 8.
  int noise_met = 0, noise_stable = 0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& table = exact_tables[i];
    const std::uint64_t salt = options.seed;
    FunctionEvaluation noisy(
        [&table, salt, eps](const Anchor& a) {
          SeededRng r = SeededRng(salt).derive(a.counts);
          return std::clamp(table.at(a) + (2.0 * r.uniform01() - 1.0) * 0.99 * eps / 8.0, 0.0, 1.0);
        },
        "noisy");
    SeededRng tie(options.seed + i);
    const auto stab = check_stability(TableEvaluation(table, "exact"), noisy, instances[i].view, eps, tie);
    if (stab.hypotheses_met()) {
      ++noise_met;
      if (stab.passed.value_or(false)) ++noise_stable;
    }
  }

  const double agree_rate = static_cast<double>(agree) / trials;
  const double within_rate = static_cast<double>(within_delta) / trials;
  report.metrics = {{"n_samples", n},          {"delta", delta},         {"trials", trials},
                    {"agreement_rate", agree_rate}, {"sup_within_delta_rate", within_rate},
                    {"max_sup_deviation", max_sup}, {"hypotheses_met", hyp_met}, {"stable", stable},
                    {"noise_hypotheses_met", noise_met}, {"noise_stable", noise_stable}};
  report.checks.push_back({"exact_selection_singleton", singleton, "constructed instances have a unique A*"});
  report.checks.push_back({"empirical_agreement", agree_rate >= 0.99,
                           std::to_string(agree) + "/" + std::to_string(trials) + " trials agree"});
  report.checks.push_back({"uniform_deviation", within_rate >= 0.99,
                           "sup |MC - exact| <= delta in " + std::to_string(within_delta) + "/" +
                               std::to_string(trials) + " trials"});
  report.checks.push_back({"stability_assertion", stable == hyp_met && noise_stable == noise_met && noise_met > 0,
                           "Monte-Carlo " + std::to_string(stable) + "/" + std::to_string(hyp_met) + ", noise " +
                               std::to_string(noise_stable) + "/" + std::to_string(noise_met)});
  return report;
}

// ------------------------------------------------------------------- moments

VerifyReport verify_moments(const VerifyOptions&) {
  VerifyReport report;
  report.id = "moments";
  using i128 = __int128;
  int moment_failures = 0, third_failures = 0, bound_failures = 0;
  double max_diff = 0.0;
  for (int m = 1; m <= 20; ++m) {
    // Exact sums S_p = sum_k C(m, k) k^p, so E[B^p] = S_p / 2^m.
    i128 s[5] = {0, 0, 0, 0, 0};
    i128 c = 1;
    for (int k = 0; k <= m; ++k) {
      i128 pw = 1;
      for (int p = 0; p <= 4; ++p) {
        s[p] += c * pw;
        pw *= k;
      }
      c = c * (m - k) / (k + 1);
    }
    const i128 x = m;
    const i128 num[5] = {1, x, x * x + x, x * x * x + 3 * x * x, x * x * x * x + 6 * x * x * x + 3 * x * x - 2 * x};
    const auto mom = binomial_moments(m);
    const double formula[5] = {1.0, mom.e1, mom.e2, mom.e3, mom.e4};
    for (int p = 1; p <= 4; ++p) {
      // num_p / 2^p == S_p / 2^m, compared without rounding.
      const bool exact_ok = num[p] * (i128{1} << m) == s[p] * (i128{1} << p);
      const double enumerated = std::ldexp(static_cast<double>(s[p]), -m);
      const double diff = std::abs(enumerated - formula[p]);
      max_diff = std::max(max_diff, diff);
      if (!exact_ok || diff > 1e-12) {
        ++moment_failures;
        report.counterexamples.push_back({{"m", m}, {"p", p}, {"formula", formula[p]}, {"enumerated", enumerated}});
      }
    }
    if (std::abs(mom.variance() - m / 4.0) > 1e-12) ++moment_failures;
    if (m % 2 == 0) {
      // 2^m E|B - m/2|^3 is an integer for even m.
      i128 t = 0, cc = 1, central = 0;
      for (int k = 0; k <= m; ++k) {
        const i128 dev = k > m / 2 ? k - m / 2 : m / 2 - k;
        t += cc * dev * dev * dev;
        if (k == m / 2) central = cc;
        cc = cc * (m - k) / (k + 1);
      }
      const bool exact_ok = t * 4 == x * x * central;
      const double diff = std::abs(std::ldexp(static_cast<double>(t), -m) - third_abs_moment_exact(m));
      max_diff = std::max(max_diff, diff);
      if (!exact_ok || diff > 1e-12) {
        ++third_failures;
        report.counterexamples.push_back({{"m", m}, {"third_abs_exact", third_abs_moment_exact(m)}});
      }
    }
  }
  for (int m = 2; m <= 40; m += 2) {
    if (third_abs_moment_exact(m) > third_abs_moment_bound(m)) {
      ++bound_failures;
      report.counterexamples.push_back({{"m", m}, {"exact", third_abs_moment_exact(m)},
                                        {"bound", third_abs_moment_bound(m)}});
    }
  }
  report.metrics = {{"max_abs_difference", max_diff}};
  report.checks.push_back({"raw_moments", moment_failures == 0, "m = 1..20, p = 1..4"});
  report.checks.push_back({"third_absolute_moment", third_failures == 0, "even m <= 20"});
  report.checks.push_back({"third_absolute_bound", bound_failures == 0, "even m <= 40"});
  return report;
}

// -------------------------------------------------------------- gradient idf

LabeledCorpus synthetic_sentiment_corpus(std::size_t n_docs, SeededRng& rng) {
  static const std::vector<std::string> positive{"great", "excellent", "superb", "lovely", "delightful", "perfect"};
  static const std::vector<std::string> negative{"awful", "terrible", "bland", "rude", "dirty", "slow"};
  static const std::vector<std::string> neutral{
      "the",   "food",  "was",    "a",     "place", "we",    "had",   "dinner", "table", "menu",
      "staff", "at",    "it",     "our",   "night", "with",  "and",   "there",  "order", "lunch",
      "soup",  "wine",  "friday", "town",  "corner", "chef", "plate", "bread",  "room",  "visit"};
  LabeledCorpus corpus;
  for (std::size_t i = 0; i < n_docs; ++i) {
    const bool pos = rng.uniform01() < 0.5;
    std::vector<std::string> tokens;
    const int fillers = uniform_int(rng, 4, 7);
    for (int f = 0; f < fillers; ++f) tokens.push_back(neutral[rng.uniform_below(neutral.size())]);
    if (pos) {
      tokens.push_back(positive[rng.uniform_below(positive.size())]);
    } else {
      const int cues = uniform_int(rng, 0, 2);
      for (int c = 0; c < cues; ++c) tokens.push_back(negative[rng.uniform_below(negative.size())]);
    }
    for (std::size_t k = tokens.size(); k > 1; --k) std::swap(tokens[k - 1], tokens[rng.uniform_below(k)]);
    std::string raw;
    for (const auto& tok : tokens) raw += (raw.empty() ? "" : " ") + tok;
    corpus.raw_texts.push_back(raw);
    corpus.documents.push_back(Document{tokens});
    corpus.labels.push_back(pos ? 1 : 0);
  }
  return corpus;
}

VerifyReport verify_gradient_idf(const VerifyOptions& options) {
  VerifyReport report;
  report.id = "gradient_idf";
  SeededRng rng(options.seed);
  const LabeledCorpus corpus = synthetic_sentiment_corpus(500, rng);
  const CorpusStats stats = fit_corpus(corpus.documents);

  ModelTemplate mlp_t;
  mlp_t.kind = ModelTemplate::Kind::mlp;
  TrainOptions train;
  train.epochs = 300;
  train.learning_rate = 1.0;
  train.seed = options.seed;
  const TrainResult mlp = train_tiny(mlp_t, corpus.documents, corpus.labels, stats, train);
  ModelTemplate lin_t;
  const TrainResult lin = train_tiny(lin_t, corpus.documents, corpus.labels, stats, train);

  const double eps = 0.05;
  const int repeats = 10;
  const std::size_t n = 10000;
  const auto examples = static_cast<std::size_t>(trials_or(options, 20));
  double sum_j = 0.0, sum_base = 0.0;
  std::size_t rows = 0;
  json per_example = json::array();
  for (std::size_t i = 0; i < corpus.documents.size() && rows < examples; ++i) {
    const Document& doc = corpus.documents[i];
    if (!decide(*mlp.model, doc, stats)) continue;
    const LocalView view = local_view(doc, stats);
    const RankedWords ranking = gradient_idf_ranking(*mlp.model, doc, stats);
    double ej = 0.0, eb = 0.0;
    for (int r = 0; r < repeats; ++r) {
      SeededRng run_rng = rng.derive(static_cast<std::uint64_t>(i * 1000 + static_cast<std::size_t>(r)));
      const auto trace = empirical_anchors(view, *mlp.model, eps, n, run_rng, search_options(options));
      const auto words = anchor_word_set(view, trace.chosen);
      ej += jaccard(words, ranking.top(words.size()));
      std::set<std::string> random_words;
      const auto perm = permutation(view.size(), run_rng);
      for (std::size_t k = 0; k < words.size(); ++k) random_words.insert(view.words[perm[k]]);
      eb += jaccard(words, random_words);
    }
    ej /= repeats;
    eb /= repeats;
    per_example.push_back({{"index", i}, {"jaccard", ej}, {"baseline", eb}});
    sum_j += ej;
    sum_base += eb;
    ++rows;
  }
  const double mean_j = rows ? sum_j / static_cast<double>(rows) : 0.0;
  const double mean_b = rows ? sum_base / static_cast<double>(rows) : 0.0;

  // Linear control on examples meeting the greedy prediction's hypotheses.
  const auto& linear = dynamic_cast<const LinearClassifier&>(*lin.model);
  std::size_t compliant = 0, perfect = 0;
  double lin_sum = 0.0;
  for (std::size_t i = 0; i < corpus.documents.size() && compliant < examples; ++i) {
    const Document& doc = corpus.documents[i];
    if (!decide(linear, doc, stats)) continue;
    const LocalView view = local_view(doc, stats);
    if (!linear_prediction_violations(linear, view).empty()) continue;
    GaussianPrecision p(linear, view);
    SeededRng tie = rng.derive(static_cast<std::uint64_t>(900000 + i));
    const auto trace = exhaustive_p_anchors(view, p, eps, tie, search_options(options));
    if (trace.tie_count != 1) continue;
    ++compliant;
    const auto words = anchor_word_set(view, trace.chosen);
    const double j = jaccard(words, gradient_idf_ranking(linear, doc, stats).top(words.size()));
    lin_sum += j;
    if (j == 1.0) ++perfect;
  }
  const double lin_mean = compliant ? lin_sum / static_cast<double>(compliant) : 0.0;

  report.metrics = {{"mlp_train_accuracy", mlp.train_accuracy},
                    {"linear_train_accuracy", lin.train_accuracy},
                    {"examples", rows},
                    {"mean_jaccard", mean_j},
                    {"mean_baseline", mean_b},
                    {"linear_compliant_examples", compliant},
                    {"linear_mean_jaccard", lin_mean},
                    {"per_example", per_example}};
  report.checks.push_back({"mlp_accuracy", mlp.train_accuracy >= 0.95, "train accuracy " + fmt(mlp.train_accuracy)});
  report.checks.push_back({"beats_random_baseline", rows > 0 && mean_j - mean_b >= 0.3,
                           "mean Jaccard " + fmt(mean_j) + " vs baseline " + fmt(mean_b)});
  report.checks.push_back({"linear_control", compliant > 0 && perfect == compliant,
                           std::to_string(perfect) + "/" + std::to_string(compliant) + " compliant examples at 1.0"});
  return report;
}

// ------------------------------------------------------------------ registry

std::vector<std::string> verification_ids() {
  return {"sampling_equivalence", "stability",   "concentration",       "dummy",
          "presence_rule",        "small_tree",  "gaussian_fit",        "linear_maximization",
          "normalized_fit",       "moments",     "gradient_idf"};
}

VerifyReport run_verification(std::string_view id, const VerifyOptions& options) {
  VerifyReport r;
  if (id == "sampling_equivalence") r = verify_sampling_equivalence(options);
  else if (id == "stability" || id == "concentration") r = verify_concentration_stability(options);
  else if (id == "dummy") r = verify_dummy(options);
  else if (id == "presence_rule") r = verify_presence_rule(options);
  else if (id == "small_tree") r = verify_small_tree(options);
  else if (id == "gaussian_fit") r = verify_gaussian_fit(options);
  else if (id == "linear_maximization") r = verify_linear_maximization(options);
  else if (id == "normalized_fit") r = verify_normalized_fit(options);
  else if (id == "moments") r = verify_moments(options);
  else if (id == "gradient_idf") r = verify_gradient_idf(options);
  else throw InvalidArgument("unknown verification id '" + std::string(id) + "'");
  r.id = std::string(id);
  return r;
}

}  // namespace anchor_forge
