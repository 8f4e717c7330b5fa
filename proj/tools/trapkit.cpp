#include <algorithm>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "driver/config.hpp"
#include "driver/run.hpp"

namespace {

using namespace trapkit;
using namespace trapkit::driver;

extern "C" void on_sigint(int) { interrupt_flag().store(true); }

std::string default_out_dir(const ExperimentConfig& c) {
  if (!c.output_dir.empty()) return c.output_dir;
  if (const char* env = std::getenv("TRAPKIT_OUT"); env && *env) return std::string(env) + "/" + c.experiment;
  return "trapkit-out/" + c.experiment;
}

void print_verdicts(const RunResult& r) {
  for (const auto& v : r.output.verdicts) {
    std::printf("%s  %-48s  stat=%-12.6g thr=%-10.4g %s\n", v.pass ? "PASS" : "FAIL", v.name.c_str(), v.statistic,
                v.threshold, v.note.c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bouchaud trap model experiments"};
  std::string experiment, config_path, out;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  bool fresh = false;
  std::string names;
  for (const auto& n : experiment_names()) names += (names.empty() ? "" : ", ") + n;
  app.add_option("experiment", experiment, "One of: " + names)->required();
  app.add_option("--config,-c", config_path, "JSON config; unset fields take their defaults");
  auto* seed_opt = app.add_option("--seed", seed, "Master seed (overrides the config)");
  app.add_option("--out,-o", out, "Output directory (default: config output_dir, then $TRAPKIT_OUT/<experiment>)");
  app.add_option("--threads,-j", threads, "Worker threads (default: hardware concurrency)");
  app.add_flag("--fresh", fresh, "Ignore results of an earlier run with the same config");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kPass : kConfigError;
  }

  ExperimentConfig config;
  try {
    json j = json::object();
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      if (!is) throw ConfigError("cannot read config " + config_path);
      j = json::parse(is);
    }
    if (j.contains("experiment") && j["experiment"] != experiment) {
      throw ConfigError("config is for experiment '" + j["experiment"].get<std::string>() + "', not '" + experiment +
                        "'");
    }
    j["experiment"] = experiment;
    config = config_from_json(j);
    if (seed_opt->count()) config.seed = seed;
    if (!out.empty()) config.output_dir = out;
    config.validate();
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "trapkit: config error: %s\n", e.what());
    return kConfigError;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "trapkit: config error: %s\n", e.what());
    return kConfigError;
  }

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  const std::string dir = default_out_dir(config);
  std::signal(SIGINT, on_sigint);
  try {
    const RunResult r = run_experiment(config, dir, threads, !fresh);
    print_verdicts(r);
    std::printf("%s: %s, results in %s\n", experiment.c_str(), r.all_pass ? "all verdicts pass" : "some verdicts fail",
                dir.c_str());
    return r.all_pass ? kPass : kVerdictFailed;
  } catch (const Interrupted&) {
    std::fprintf(stderr, "trapkit: interrupted; rerun the same command to resume from %s\n", dir.c_str());
    return kInterrupted;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "trapkit: config error: %s\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "trapkit: %s\n", e.what());
    return kFailure;
  }
}
