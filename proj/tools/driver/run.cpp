#include "driver/run.hpp"

#include <chrono>
#include <fstream>

#include "driver/experiments.hpp"
#include "trapkit/io.hpp"
#include "trapkit/rng.hpp"

#ifndef TRAPKIT_VERSION
#define TRAPKIT_VERSION "unknown"
#endif

namespace fs = std::filesystem;

namespace trapkit::driver {

ExperimentOutput dispatch(StageRunner& runner) {
  const std::string& name = runner.config().experiment;
  if (name == "balance") return run_balance(runner);
  if (name == "range") return run_range(runner);
  if (name == "deep-traps") return run_deep_traps(runner);
  if (name == "green") return run_green(runner);
  if (name == "characterize") return run_characterize(runner);
  if (name == "clock") return run_clock(runner);
  if (name == "fk") return run_fk(runner);
  if (name == "quenched") return run_quenched(runner);
  throw ConfigError("unknown experiment '" + name + "'");
}

namespace {

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::trunc);
  if (!os) throw SinkError("cannot write " + p.string());
  os << text;
  if (!os) throw SinkError("write failed for " + p.string());
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, const fs::path& out_dir, unsigned threads, bool resume) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  StageRunner runner(config, out_dir, threads, resume);
  RunResult res;
  res.output = dispatch(runner);
  res.stages = runner.log();
  // The scaling results are stated for d >= 5.
  if (config.env.dim < 5 && config.experiment != "balance" && config.experiment != "green") {
    for (auto& v : res.output.verdicts) v.note += (v.note.empty() ? "" : "; ") + std::string("d < 5: outside theorem scope");
  }
  res.all_pass = true;
  json verdicts = json::array();
  json failed = json::array();
  for (const auto& v : res.output.verdicts) {
    verdicts.push_back(to_json(v));
    if (!v.pass) {
      res.all_pass = false;
      failed.push_back(v.name);
    }
  }
  write_file(out_dir / "verdicts.json", verdicts.dump(2) + "\n");
  write_summary_csv(out_dir / "summary.csv", res.output.summary);

  json m;
  m["experiment"] = config.experiment;
  m["version"] = TRAPKIT_VERSION;
  m["fingerprint"] = config_fingerprint(config);
  m["config"] = to_json(config);
  m["threads"] = threads;
  m["task_seed"] = "derive_seed(seed, task, tag)";
  json stages = json::array();
  for (const auto& s : res.stages) {
    json j;
    j["name"] = s.name;
    j["tasks"] = s.tasks;
    j["resumed_tasks"] = s.resumed_tasks;
    j["tag"] = s.tag;
    json seeds = json::array();
    for (std::size_t k = 0; k < s.tasks; ++k) seeds.push_back(derive_seed(config.seed, k, s.tag));
    j["task_seeds"] = seeds;
    j["wall_seconds"] = s.wall_seconds;
    stages.push_back(j);
  }
  m["stages"] = stages;
  m["verdicts"] = {{"total", res.output.verdicts.size()},
                   {"passed", res.output.verdicts.size() - failed.size()},
                   {"failed", failed}};
  m["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_file(out_dir / "manifest.json", m.dump(2) + "\n");
  return res;
}

}  // namespace trapkit::driver
