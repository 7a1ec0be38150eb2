#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "anchor_forge/analysis.hpp"
#include "anchor_forge/anchors.hpp"
#include "anchor_forge/corpus.hpp"
#include "anchor_forge/errors.hpp"
#include "anchor_forge/models.hpp"
#include "anchor_forge/stats.hpp"
#include "anchor_forge/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace anchor_forge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr std::uint64_t kSampleCap = 100000;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
    out << content;
    if (!out.flush()) throw Error("write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, path);
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty() || out_path == "-") {
    std::cout << content;
  } else {
    write_atomic(out_path, content);
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

bool is_stats_file(const std::string& path) { return fs::path(path).extension() == ".json"; }

/// A --corpus argument: fitted stats, plus the documents when a corpus file
/// was given.
struct CorpusInput {
  std::optional<CorpusStats> stats;
  std::optional<LabeledCorpus> corpus;
};

CorpusInput load_corpus_input(const std::string& corpus_path, const std::string& stats_path) {
  CorpusInput in;
  if (!corpus_path.empty()) {
    if (is_stats_file(corpus_path)) {
      in.stats = CorpusStats::from_json(read_file(corpus_path));
    } else {
      in.corpus = read_corpus(corpus_path);
    }
  }
  if (!stats_path.empty()) in.stats = CorpusStats::from_json(read_file(stats_path));
  if (!in.stats) {
    if (!in.corpus) throw InvalidArgument("--corpus (a corpus file or fitted stats .json) is required");
    in.stats = fit_corpus(in.corpus->documents);
  }
  return in;
}

std::unique_ptr<Classifier> load_model_arg(const std::string& spec) {
  if (spec.empty()) throw InvalidArgument("--model is required");
  if (auto inline_model = parse_model_spec(spec)) return inline_model;
  return load_model(read_file(spec));
}

Document example_document(const CorpusInput& in, const std::string& text, int index) {
  if (!text.empty() && index >= 0) throw InvalidArgument("give either --example or --index, not both");
  if (!text.empty()) return tokenize(text);
  if (index >= 0) {
    if (!in.corpus) throw InvalidArgument("--index needs a corpus file in --corpus");
    if (static_cast<std::size_t>(index) >= in.corpus->documents.size()) throw InvalidArgument("--index out of range");
    return in.corpus->documents[static_cast<std::size_t>(index)];
  }
  throw InvalidArgument("--example or --index is required");
}

std::uint64_t default_samples(int b, double epsilon, bool& capped) {
  const std::uint64_t n = hoeffding_sample_size(b, epsilon / 8.0, 0.01);
  capped = n > kSampleCap;
  return capped ? kSampleCap : n;
}

json anchor_json(const LocalView& view, const Anchor& anchor) {
  json j = json::object();
  for (std::size_t i = 0; i < view.size(); ++i) {
    if (anchor.counts[i] > 0) j[view.words[i]] = anchor.counts[i];
  }
  return j;
}

std::vector<double> parse_shifts(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw InvalidArgument("bad shift value '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw InvalidArgument("--shifts needs at least one value");
  return out;
}

std::string fixed(double x, int digits) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(digits);
  out << x;
  return out.str();
}

struct Common {
  std::string corpus;
  std::string stats;
  std::string model;
  std::string example;
  int index = -1;
  double epsilon = 0.05;
  std::uint64_t n = 0;
  std::uint64_t seed = kDefaultSeed;
  std::string eval = "exact";
  std::string out;
  int cap = 0;
  bool dump_space = false;
  int repeats = 10;
  std::string shifts;
  int trials = 0;
};

void check_epsilon(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("--epsilon must lie in (0, 1)");
}

// ---------------------------------------------------------------- commands

int cmd_fit(const Common& c) {
  if (c.corpus.empty()) throw InvalidArgument("--corpus is required");
  const LabeledCorpus corpus = read_corpus(c.corpus);
  emit(c.out, fit_corpus(corpus.documents).to_json());
  return kExitOk;
}

int cmd_train(const Common& c, const std::string& kind, const std::string& vectorizer, int epochs, double lr) {
  if (c.corpus.empty()) throw InvalidArgument("--corpus is required");
  const LabeledCorpus corpus = read_corpus(c.corpus);
  if (!corpus.has_labels()) throw InvalidArgument("training needs a CSV corpus with a label column");
  const CorpusStats stats =
      c.stats.empty() ? fit_corpus(corpus.documents) : CorpusStats::from_json(read_file(c.stats));
  ModelTemplate tmpl;
  if (kind == "mlp") {
    tmpl.kind = ModelTemplate::Kind::mlp;
  } else if (kind != "linear") {
    throw InvalidArgument("--kind must be linear or mlp");
  }
  tmpl.vectorizer = vectorizer_from_string(vectorizer);
  TrainOptions opts;
  opts.epochs = epochs;
  opts.learning_rate = lr;
  opts.seed = c.seed;
  const TrainResult result = train_tiny(tmpl, corpus.documents, corpus.labels, stats, opts);
  emit(c.out, result.model->to_json());
  std::cerr << "train accuracy: " << result.train_accuracy << "\n";
  return kExitOk;
}

int cmd_explain(const Common& c) {
  check_epsilon(c.epsilon);
  const CorpusInput in = load_corpus_input(c.corpus, c.stats);
  const auto model = load_model_arg(c.model);
  const Document doc = example_document(in, c.example, c.index);
  if (doc.empty()) throw EmptyDocumentError("the example has no tokens");
  LocalView view = local_view(doc, *in.stats);
  if (c.cap > 0) view = cap_multiplicities(view, c.cap);
  if (!model->bind(view)->decide(view.mult)) {
    throw PreconditionError("the model classifies the example as 0; anchors explain positive predictions only");
  }
  const EvalKind kind = eval_kind_from_string(c.eval);
  bool capped = false;
  const std::uint64_t n = c.n > 0 ? c.n : default_samples(view.length(), c.epsilon, capped);
  if (capped && kind == EvalKind::monte_carlo) {
    std::cerr << "warning: Hoeffding sample size exceeds " << kSampleCap << "; using n = " << kSampleCap << "\n";
  }
  SeededRng rng(c.seed);
  const std::uint64_t master = rng.next_u64();
  const auto eval = make_evaluation(kind, *model, view, n, master);
  SearchOptions options;
  options.dump_space = c.dump_space;
  const SelectionTrace trace = exhaustive_p_anchors(view, *eval, c.epsilon, rng, options);

  json out;
  out["anchor"] = anchor_json(view, trace.chosen);
  out["rendering"] = render_anchor(view, trace.chosen);
  out["precision"] = trace.chosen_value;
  out["evaluation"] = trace.evaluation;
  out["epsilon"] = trace.epsilon;
  out["seed"] = c.seed;
  out["tie_count"] = trace.tie_count;
  out["a1_size"] = trace.a1_size;
  out["a1_complete"] = trace.a1_complete;
  out["a2_size"] = trace.a2.size();
  out["a3_size"] = trace.a3.size();
  out["evaluated"] = trace.evaluated;
  out["length"] = trace.chosen.length();
  out["example"] = doc.tokens;
  out["cap"] = c.cap;
  if (kind == EvalKind::monte_carlo) {
    out["n_samples"] = n;
    out["error_bound"] = hoeffding_delta(n, 0.99);
  }
  if (kind == EvalKind::gaussian) {
    if (const auto* linear = dynamic_cast<const LinearClassifier*>(model.get())) {
      const auto est = gaussian_precision(linear_inputs(*linear, view, trace.chosen));
      if (est.error_bound) out["error_bound"] = *est.error_bound;
      if (est.warning) out["warning"] = *est.warning;
    }
  }
  if (in.corpus) {
    out["coverage"] = coverage(anchor_word_set(view, trace.chosen), in.corpus->documents);
  }
  if (trace.space) {
    json space = json::array();
    for (const auto& s : *trace.space) space.push_back({{"anchor", anchor_json(view, s.anchor)}, {"p", s.value}});
    out["space"] = std::move(space);
  }
  emit(c.out, dump(out));
  if (!c.out.empty() && c.out != "-") {
    std::cout << "anchor: " << render_anchor(view, trace.chosen) << "\nprecision: " << trace.chosen_value
              << " (" << trace.evaluation << ")\ntie_count: " << trace.tie_count << "\n";
    if (in.corpus) std::cout << "coverage: " << out["coverage"].get<double>() << "\n";
  }
  return kExitOk;
}

int cmd_verify(const Common& c, const std::string& id) {
  VerifyOptions opts;
  opts.seed = c.seed;
  opts.trials = c.trials;
  const auto known = verification_ids();
  if (std::find(known.begin(), known.end(), id) == known.end()) {
    throw InvalidArgument("unknown verification id '" + id + "'");
  }
  const VerifyReport report = run_verification(id, opts);
  json out = report.to_json();
  out["seed"] = c.seed;
  emit(c.out, dump(out));
  for (const auto& chk : report.checks) {
    std::cerr << (chk.passed ? "PASS " : "FAIL ") << chk.name << ": " << chk.detail << "\n";
  }
  return report.passed() ? kExitOk : kExitFailure;
}

int cmd_sweep(const Common& c) {
  check_epsilon(c.epsilon);
  const CorpusInput in = load_corpus_input(c.corpus, c.stats);
  const auto model = load_model_arg(c.model);
  const auto* linear = dynamic_cast<const LinearClassifier*>(model.get());
  if (!linear) throw InvalidArgument("sweep needs a linear model");
  const Document doc = example_document(in, c.example, c.index);
  if (doc.empty()) throw EmptyDocumentError("the example has no tokens");
  LocalView view = local_view(doc, *in.stats);
  if (c.cap > 0) view = cap_multiplicities(view, c.cap);
  const auto shifts = parse_shifts(c.shifts.empty() ? "0" : c.shifts);
  bool capped = false;
  const std::uint64_t n = c.n > 0 ? c.n : default_samples(view.length(), c.epsilon, capped);
  SeededRng rng(c.seed);
  const auto rows = shift_sweep(*linear, view, shifts, c.epsilon, rng, eval_kind_from_string(c.eval), n);
  emit(c.out, sweep_csv(rows, view));
  return kExitOk;
}

int cmd_jaccard(const Common& c) {
  check_epsilon(c.epsilon);
  const CorpusInput in = load_corpus_input(c.corpus, c.stats);
  if (!in.corpus) throw InvalidArgument("jaccard needs a corpus file of examples in --corpus");
  const auto model = load_model_arg(c.model);
  if (!model->differentiable()) throw NotDifferentiableError("jaccard needs a linear or mlp model");
  const EvalKind kind = eval_kind_from_string(c.eval == "exact" ? "monte_carlo" : c.eval);
  if (c.repeats < 1) throw InvalidArgument("--repeats must be >= 1");
  const CorpusStats& stats = *in.stats;

  std::ostringstream csv;
  csv << "index,anchor,top_words,jaccard,baseline\n";
  std::vector<double> scores, baselines;
  SeededRng master(c.seed);
  for (std::size_t i = 0; i < in.corpus->documents.size(); ++i) {
    const Document& doc = in.corpus->documents[i];
    if (doc.empty() || !decide(*model, doc, stats)) continue;
    LocalView view = local_view(doc, stats);
    if (c.cap > 0) view = cap_multiplicities(view, c.cap);
    const RankedWords ranking = gradient_idf_ranking(*model, doc, stats);
    bool capped = false;
    const std::uint64_t n = c.n > 0 ? c.n : default_samples(view.length(), c.epsilon, capped);
    double js = 0.0, bs = 0.0;
    std::string last_anchor, last_top;
    for (int r = 0; r < c.repeats; ++r) {
      SeededRng rng = master.derive(static_cast<std::uint64_t>(i) * 100003u + static_cast<std::uint64_t>(r));
      const auto eval = make_evaluation(kind, *model, view, n, rng.next_u64());
      SelectionTrace trace;
      try {
        trace = exhaustive_p_anchors(view, *eval, c.epsilon, rng);
      } catch (const SearchSpaceError&) {
        break;
      }
      const auto words = anchor_word_set(view, trace.chosen);
      const auto top = ranking.top(words.size());
      js += jaccard(words, top);
      std::vector<std::size_t> perm(view.size());
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      for (std::size_t k = perm.size(); k > 1; --k) std::swap(perm[k - 1], perm[rng.uniform_below(k)]);
      std::set<std::string> random_words;
      for (std::size_t k = 0; k < words.size(); ++k) random_words.insert(view.words[perm[k]]);
      bs += jaccard(words, random_words);
      last_anchor = render_anchor(view, trace.chosen);
      last_top.clear();
      for (const auto& w : ranking.words) {
        if (!top.count(w)) continue;
        last_top += (last_top.empty() ? "" : " ") + w;
      }
      if (r + 1 == c.repeats) {
        scores.push_back(js / c.repeats);
        baselines.push_back(bs / c.repeats);
        csv << i << ',' << last_anchor << ',' << last_top << ',' << fixed(scores.back(), 4) << ','
            << fixed(baselines.back(), 4) << '\n';
      }
    }
  }
  if (scores.empty()) throw PreconditionError("no positively classified examples in the corpus");
  auto mean_sd = [](const std::vector<double>& v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var = v.size() > 1 ? var / static_cast<double>(v.size() - 1) : 0.0;
    return fixed(mean, 2) + " ± " + fixed(std::sqrt(var), 2);
  };
  csv << "aggregate,,," << mean_sd(scores) << ',' << mean_sd(baselines) << '\n';
  emit(c.out, csv.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anchor-forge: exhaustive anchor explanations for TF-IDF text classifiers"};
  app.require_subcommand(1);
  Common c;

  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  };
  auto add_out = [&](CLI::App* sub) { sub->add_option("--out", c.out, "Output file (stdout when omitted)"); };
  auto add_explain_flags = [&](CLI::App* sub) {
    sub->add_option("--corpus", c.corpus, "Corpus file, or fitted stats (.json)");
    sub->add_option("--stats", c.stats, "Fitted stats JSON (overrides fitting --corpus)");
    sub->add_option("--model", c.model, "Model JSON file or inline spec (rule:a,b | tree:a,b,c | const:1)");
    sub->add_option("--example", c.example, "Example text");
    sub->add_option("--index", c.index, "Example index into the --corpus file");
    sub->add_option("--epsilon", c.epsilon, "Precision tolerance")->capture_default_str();
    sub->add_option("--n", c.n, "Monte-Carlo samples per anchor (default from Hoeffding, capped at 1e5)");
    sub->add_option("--eval", c.eval, "exact | closed_form | monte_carlo | gaussian | gaussian_normalized")
        ->capture_default_str();
    sub->add_option("--cap", c.cap, "Cap every word multiplicity at this value");
    add_seed(sub);
    add_out(sub);
  };

  auto* fit = app.add_subcommand("fit", "Fit document frequencies on a corpus");
  fit->add_option("--corpus", c.corpus, "Corpus file (one document per line, or CSV text,label)")->required();
  add_out(fit);

  std::string kind = "linear", vectorizer = "plain";
  int epochs = 500;
  double lr = 0.5;
  auto* train = app.add_subcommand("train", "Train a linear model or a small MLP on a labelled CSV corpus");
  train->add_option("--corpus", c.corpus, "CSV corpus with text,label columns")->required();
  train->add_option("--stats", c.stats, "Fitted stats JSON (fitted on --corpus when omitted)");
  train->add_option("--kind", kind, "linear | mlp")->capture_default_str();
  train->add_option("--vectorizer", vectorizer, "plain | normalized")->capture_default_str();
  train->add_option("--epochs", epochs, "Gradient-descent epochs")->capture_default_str();
  train->add_option("--lr", lr, "Learning rate")->capture_default_str();
  add_seed(train);
  add_out(train);

  auto* explain = app.add_subcommand("explain", "Explain one positive prediction with exhaustive anchors");
  add_explain_flags(explain);
  explain->add_flag("--dump-space", c.dump_space, "Include every (anchor, p) pair in the output");

  std::string verify_id;
  auto* verify = app.add_subcommand("verify", "Run a verification procedure");
  verify->add_option("id", verify_id, "Procedure id")->required();
  verify->add_option("--trials", c.trials, "Trials or instances (0 = procedure default)");
  add_seed(verify);
  add_out(verify);

  auto* sweep = app.add_subcommand("sweep", "Intercept-shift sweep for a linear model (CSV)");
  add_explain_flags(sweep);
  sweep->add_option("--shifts", c.shifts, "Comma-separated shifts S")->required();

  auto* jac = app.add_subcommand("jaccard", "Jaccard between anchors and top gradient x idf words (CSV)");
  add_explain_flags(jac);
  jac->add_option("--repeats", c.repeats, "Anchor runs per example")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*fit) return cmd_fit(c);
    if (*train) return cmd_train(c, kind, vectorizer, epochs, lr);
    if (*explain) return cmd_explain(c);
    if (*verify) return cmd_verify(c, verify_id);
    if (*sweep) return cmd_sweep(c);
    if (*jac) return cmd_jaccard(c);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
