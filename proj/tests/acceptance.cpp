#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "anchor_forge/verify.hpp"

namespace fs = std::filesystem;
using namespace anchor_forge;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Criterion {
  int number;
  std::string title;
  double limit_seconds;
  std::function<Outcome()> run;
};

std::string summarize(const VerifyReport& report) {
  std::string out;
  for (const auto& c : report.checks) {
    if (!out.empty()) out += "; ";
    out += (c.passed ? "" : "FAILED ") + c.name + ": " + c.detail;
  }
  return out;
}

Outcome from_report(const VerifyReport& report) { return {report.passed(), summarize(report)}; }

Outcome from_checks(const VerifyReport& report, std::initializer_list<const char*> names) {
  Outcome o{true, ""};
  for (const char* name : names) {
    const Check& c = report.check(name);
    o.passed = o.passed && c.passed;
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += (c.passed ? "" : "FAILED ") + c.name + ": " + c.detail;
  }
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome cli_determinism() {
  const fs::path dir = fs::temp_directory_path() / "anchor_forge_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cli = ANCHOR_FORGE_CLI;
  const std::string data = ANCHOR_FORGE_DATA;
  const std::string csv = data + "/reviews.csv";
  const std::string model = (dir / "model.json").string();
  const std::string mlp = (dir / "mlp.json").string();

  if (std::system((cli + " train --corpus " + csv + " --epochs 200 --out " + model + " 2>/dev/null").c_str()) != 0 ||
      std::system((cli + " train --corpus " + csv + " --kind mlp --epochs 50 --out " + mlp + " 2>/dev/null").c_str()) !=
          0) {
    return {false, "training a model for the determinism runs failed"};
  }

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"fit", "fit --corpus " + csv},
      {"train_linear", "train --corpus " + csv + " --epochs 100 --seed 42"},
      {"train_mlp", "train --corpus " + csv + " --kind mlp --epochs 30 --seed 42"},
      {"explain_exact", "explain --corpus " + csv + " --model rule:very,delicious --example \"food is very delicious\" --seed 42"},
      {"explain_mc", "explain --corpus " + csv + " --model " + model + " --index 1 --eval monte_carlo --n 2000 --seed 42"},
      {"explain_gauss", "explain --corpus " + csv + " --model " + model + " --index 1 --eval gaussian --dump-space --seed 42"},
      {"verify", "verify small_tree --seed 42"},
      {"sweep", "sweep --corpus " + csv + " --model " + model + " --index 1 --shifts=-1,0,0.5 --eval gaussian --seed 42"},
      {"jaccard", "jaccard --corpus " + csv + " --model " + mlp + " --repeats 2 --n 300 --epsilon 0.2 --cap 2 --seed 42"},
  };
  std::size_t identical = 0;
  std::string failures;
  for (const auto& [name, args] : commands) {
    std::string outputs[2];
    bool ok = true;
    for (int r = 0; r < 2; ++r) {
      const fs::path out = dir / (name + "_" + std::to_string(r));
      const std::string cmd = cli + " " + args + " --out " + out.string() + " >/dev/null 2>&1";
      if (std::system(cmd.c_str()) != 0 || !fs::exists(out)) {
        ok = false;
        break;
      }
      outputs[r] = slurp(out);
    }
    if (ok && !outputs[0].empty() && outputs[0] == outputs[1]) {
      ++identical;
    } else {
      failures += " " + name;
    }
  }
  fs::remove_all(dir);
  std::string detail = std::to_string(identical) + "/" + std::to_string(commands.size()) +
                       " commands byte-identical across reruns";
  if (!failures.empty()) detail += "; differing or failing:" + failures;
  return {identical == commands.size(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));

  const std::vector<Criterion> criteria = {
      {1, "sampling equivalence", 5, [] { return from_report(verify_sampling_equivalence()); }},
      {2, "exact vs closed-form rule precision", 5, [] { return from_report(verify_rule_oracle()); }},
      {3, "breakpoint behavior", 1, [] { return from_report(verify_breakpoint()); }},
      {4, "small decision tree", 1, [] { return from_report(verify_small_tree()); }},
      {5, "dummy features", 30,
       [] { return from_checks(verify_dummy(), {"no_dummy_in_anchor"}); }},
      {6, "Gaussian fit", 120, [] { return from_report(verify_gaussian_fit()); }},
      {7, "linear anchor maximization", 120, [] { return from_report(verify_linear_maximization()); }},
      {8, "normalized case", 120, [] { return from_report(verify_normalized_fit()); }},
      {9, "concentration and stability", 180,
       [] {
         return from_checks(verify_concentration_stability(),
                            {"empirical_agreement", "stability_assertion", "exact_selection_singleton"});
       }},
      {10, "binomial moment identities", 1, [] { return from_report(verify_moments()); }},
      {11, "gradient x idf agreement", 300, [] { return from_report(verify_gradient_idf()); }},
      {12, "CLI determinism", 60, cli_determinism},
  };

  int failed = 0;
  std::size_t ran = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.number) == only.end()) continue;
    ++ran;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.limit_seconds;
    const bool pass = o.passed && in_time;
    failed += pass ? 0 : 1;
    std::printf("%s criterion %2d  %-36s %8.2fs (limit %gs%s)  %s\n", pass ? "PASS" : "FAIL", c.number, c.title.c_str(),
                secs, c.limit_seconds, in_time ? "" : ", EXCEEDED", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(ran) - failed, ran);
  return failed == 0 ? 0 : 1;
}
