// Acceptance suite: one line per criterion. Each criterion names the
// experiment run it reads, the verdicts that must pass, and a runtime budget
// measured on that run (or on one of its stages).

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "driver/config.hpp"
#include "driver/run.hpp"

using namespace trapkit;
using namespace trapkit::driver;

namespace {

struct Criterion {
  int id;
  std::string title;
  std::string run;
  /// Verdict-name prefixes; every verdict matching one must pass and each
  /// prefix must match at least one verdict.
  std::vector<std::string> hard;
  /// Reported, never gating.
  std::vector<std::string> soft;
  double budget_seconds;
  /// Stage whose wall time is compared with the budget; empty = whole run.
  std::string stage;
};

const std::map<std::string, std::string>& run_configs() {
  static const std::map<std::string, std::string> configs{
      {"balance", R"({"experiment": "balance", "options": {"pairs": 10000}})"},
      {"green", R"({"experiment": "green", "replicas": 100, "box_radii": [1, 2, 3, 4, 5]})"},
      {"range", R"({"experiment": "range", "replicas": 200, "horizons": {"steps": 10000}})"},
      {"deep-traps", R"({"experiment": "deep-traps", "epsilons": [1e-2, 1e-3, 1e-4], "deltas": [1.0],
                        "replicas": 220, "horizons": {"rescaled": 0.03},
                        "options": {"green_max_epsilon": 1e-4}})"},
      {"characterize", R"({"experiment": "characterize", "epsilons": [1e-4], "deltas": [1.0], "replicas": 2000,
                          "options": {"search_rescaled": 0.02, "pool_size": 2000}})"},
      {"clock", R"({"experiment": "clock", "epsilons": [1e-2, 1e-3, 1e-4], "deltas": [1.0, 0.5, 0.25],
                   "lambdas": [0.5, 1, 2], "replicas": 2000})"},
      {"fk", R"({"experiment": "fk", "epsilons": [1e-2, 1e-3, 1e-4], "lambdas": [0.5, 1, 2], "replicas": 1000})"},
      {"quenched", R"({"experiment": "quenched", "epsilons": [1e-2, 1e-3, 1e-4], "replicas": 20,
                      "options": {"walks_per_env": 40}})"},
  };
  return configs;
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list{
      {1, "detailed balance", "balance", {"detailed-balance"}, {}, 1.0, ""},
      {2, "conductance-Green identity", "green", {"conductance-green-identity"}, {}, 60.0, ""},
      {3, "sandwich bounds", "green", {"sandwich-conductance", "sandwich-green"}, {}, 60.0, ""},
      {4, "hand-solved reference", "green", {"hand-solved-reference"}, {}, 1.0, "reference"},
      {5, "exploration i.i.d.", "range", {"exploration-depths-ks", "exploration-autocorrelation"}, {}, 300.0, ""},
      {6, "range LLN", "range", {"range-slope-stable", "range-second-moment-growth"}, {}, 300.0, ""},
      {7, "Poisson discovery", "deep-traps", {"poisson-gaps-ks", "poisson-dispersion"}, {}, 600.0, ""},
      {8, "depth law", "deep-traps", {"depth-law-ks"}, {}, 600.0, ""},
      {9,
       "exponential excess",
       "deep-traps",
       {"visited-fraction eps=0.0001", "excess-exponential eps=0.0001", "independence-e-depth eps=0.0001",
        "independence-e-greenbar eps=0.0001", "independence-depth-greenbar eps=0.0001"},
       {},
       900.0,
       ""},
      {10, "characterization identity", "characterize", {"characterization", "range-constant-vs-inverse-greenbar"},
       {}, 900.0, ""},
      {11,
       "Laplace exponent pipeline",
       "clock",
       {"reference-sampler-laplace", "psi-delta-approaches-psi", "psi-closed-form-vs-quadrature",
        "psi-delta-bernstein-shape", "psi-delta-mc-vs-exact", "clock-laplace-trend"},
       {"clock-laplace-final"},
       1800.0,
       ""},
      {12, "M1 step approximation", "deep-traps", {"m1-mean-decreasing", "m1-below-sup"}, {}, 300.0, ""},
      {13, "stable subordinator sampler", "fk", {"stable-self-similarity", "stable-increments", "stable-laplace"},
       {}, 60.0, "stable"},
      {14, "fractional kinetics", "fk", {"fk-reference-msd-slope", "fk-walk-msd-slope"}, {}, 1200.0, ""},
      {15, "quenched concentration trend", "quenched", {"quenched-variance-decreasing"}, {}, 1200.0, ""},
      {16, "small-time clock bound", "clock", {"small-time-clock-bound"}, {}, 1800.0, ""},
  };
  return list;
}

bool starts_with(const std::string& s, const std::string& p) { return s.compare(0, p.size(), p) == 0; }

struct RunRecord {
  RunResult result;
  double seconds = 0.0;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trapkit acceptance suite"};
  std::vector<int> only;
  std::string out = "acceptance-out";
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--only", only, "criterion numbers to run")->delimiter(',');
  app.add_option("--out", out, "output root");
  app.add_option("--threads,-j", threads, "worker threads");
  CLI11_PARSE(app, argc, argv);

  std::vector<Criterion> selected;
  for (const auto& c : criteria()) {
    if (only.empty() || std::find(only.begin(), only.end(), c.id) != only.end()) selected.push_back(c);
  }
  std::set<std::string> needed;
  for (const auto& c : selected) needed.insert(c.run);

  std::map<std::string, RunRecord> runs;
  for (const auto& name : needed) {
    const ExperimentConfig cfg = config_from_json(json::parse(run_configs().at(name)));
    const auto t0 = std::chrono::steady_clock::now();
    RunRecord rec;
    rec.result = run_experiment(cfg, std::filesystem::path(out) / name, threads, false);
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    runs.emplace(name, std::move(rec));
  }

  int failed = 0;
  for (const auto& c : selected) {
    const RunRecord& rec = runs.at(c.run);
    bool ok = true;
    std::string detail;
    for (const auto& prefix : c.hard) {
      std::size_t matched = 0;
      for (const auto& v : rec.result.output.verdicts) {
        if (!starts_with(v.name, prefix)) continue;
        ++matched;
        if (!v.pass) {
          ok = false;
          detail += "; failed " + v.name + " (" + v.note + ")";
        }
      }
      if (matched == 0) {
        ok = false;
        detail += "; missing " + prefix;
      }
    }
    for (const auto& prefix : c.soft) {
      for (const auto& v : rec.result.output.verdicts) {
        if (starts_with(v.name, prefix) && !v.pass) detail += "; soft gate missed: " + v.name;
      }
    }
    double seconds = rec.seconds;
    if (!c.stage.empty()) {
      for (const auto& s : rec.result.stages) {
        if (s.name == c.stage) seconds = s.wall_seconds;
      }
    }
    if (seconds > c.budget_seconds) {
      ok = false;
      detail += "; over budget";
    }
    if (!ok) ++failed;
    std::printf("%s  criterion %2d  %-30s %8.1f s / %6.0f s%s\n", ok ? "PASS" : "FAIL", c.id, c.title.c_str(),
                seconds, c.budget_seconds, detail.c_str());
  }
  std::printf("%zu criteria, %d failed\n", selected.size(), failed);
  return failed == 0 ? 0 : 1;
}
