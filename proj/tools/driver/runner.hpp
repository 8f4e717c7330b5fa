#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "driver/config.hpp"
#include "trapkit/io.hpp"
#include "trapkit/stats.hpp"

namespace trapkit::driver {

/// Set from a signal handler; workers stop picking up tasks once it is set.
std::atomic<bool>& interrupt_flag();

class Interrupted : public std::runtime_error {
 public:
  Interrupted() : std::runtime_error("run interrupted") {}
};

class SinkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TaskContext {
  std::size_t index = 0;
  /// derive_seed(master seed, index, stage tag).
  std::uint64_t seed = 0;
};

using TaskFn = std::function<std::vector<json>(const TaskContext&)>;

/// Calls fn(0..n-1) on up to `threads` workers and hands the results to
/// `sink` strictly in index order.
void parallel_ordered(std::size_t n, unsigned threads, const std::function<std::vector<json>(std::size_t)>& fn,
                      const std::function<void(std::size_t, std::vector<json>&&)>& sink);

/// Writes newline-delimited JSON, one flush per batch.
/// Returns the number of rows written.
std::size_t write_records(std::ostream& os, const std::vector<json>& rows);

/// Parses a JSONL stream; a trailing line without newline is ignored.
std::vector<json> read_records(std::istream& is);

/// Long-format, plot-ready summary row. NaN fields are left empty in CSV.
struct SummaryRow {
  std::string metric;
  double epsilon = std::numeric_limits<double>::quiet_NaN();
  double delta = std::numeric_limits<double>::quiet_NaN();
  double lambda = std::numeric_limits<double>::quiet_NaN();
  double t = std::numeric_limits<double>::quiet_NaN();
  double value = std::numeric_limits<double>::quiet_NaN();
  double std_error = std::numeric_limits<double>::quiet_NaN();
};

void write_summary_csv(const std::filesystem::path& file, const std::vector<SummaryRow>& rows);

struct StageLog {
  std::string name;
  std::size_t tasks = 0;
  std::size_t resumed_tasks = 0;
  std::uint64_t tag = 0;
  double wall_seconds = 0.0;
};

/// Executes the stages of one experiment. Stage k writes <out>/<name>.jsonl,
/// one batch of rows per task in task order. While a stage is in progress
/// <out>/<name>.jsonl.partial holds {fingerprint, tasks_done, bytes}; a
/// later run with the same fingerprint truncates the file to `bytes` and
/// continues from task `tasks_done`. Completed stages are reloaded as-is.
class StageRunner {
 public:
  StageRunner(const ExperimentConfig& config, std::filesystem::path out_dir, unsigned threads,
              bool resume);

  const ExperimentConfig& config() const { return config_; }
  const std::filesystem::path& out_dir() const { return out_; }
  unsigned threads() const { return threads_; }

  /// Runs (or resumes) a stage; returns all its rows in task order.
  std::vector<json> run_stage(const std::string& name, std::size_t tasks, const TaskFn& fn);

  const std::vector<StageLog>& log() const { return log_; }

 private:
  ExperimentConfig config_;
  std::filesystem::path out_;
  unsigned threads_;
  bool resume_;
  std::string fingerprint_;
  std::vector<StageLog> log_;
};

struct ExperimentOutput {
  std::vector<Verdict> verdicts;
  std::vector<SummaryRow> summary;
};

/// Verdict helper.
Verdict verdict(std::string name, double statistic, double threshold, bool pass, std::string note = {});

}  // namespace trapkit::driver
