#include "driver/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iterator>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "trapkit/rng.hpp"

namespace fs = std::filesystem;

namespace trapkit::driver {

std::atomic<bool>& interrupt_flag() {
  static std::atomic<bool> flag{false};
  return flag;
}

void parallel_ordered(std::size_t n, unsigned threads,
                      const std::function<std::vector<json>(std::size_t)>& fn,
                      const std::function<void(std::size_t, std::vector<json>&&)>& sink) {
  if (n == 0) return;
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      if (interrupt_flag().load()) throw Interrupted();
      sink(i, fn(i));
    }
    return;
  }

  std::mutex m;
  std::condition_variable cv;
  std::vector<std::optional<std::vector<json>>> slots(n);
  std::atomic<std::size_t> next{0};
  std::size_t finished_workers = 0;
  bool stop = false;
  std::exception_ptr error;

  auto work = [&] {
    for (;;) {
      {
        std::lock_guard<std::mutex> lk(m);
        if (stop) break;
      }
      if (interrupt_flag().load()) break;
      const std::size_t i = next.fetch_add(1);
      if (i >= n) break;
      try {
        auto rows = fn(i);
        std::lock_guard<std::mutex> lk(m);
        slots[i] = std::move(rows);
      } catch (...) {
        std::lock_guard<std::mutex> lk(m);
        if (!error) error = std::current_exception();
        stop = true;
      }
      cv.notify_all();
    }
    std::lock_guard<std::mutex> lk(m);
    ++finished_workers;
    cv.notify_all();
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);

  std::size_t written = 0;
  for (; written < n; ++written) {
    std::vector<json> rows;
    {
      std::unique_lock<std::mutex> lk(m);
      cv.wait(lk, [&] { return slots[written].has_value() || stop || finished_workers == workers; });
      if (!slots[written]) break;
      rows = std::move(*slots[written]);
      slots[written].reset();
    }
    try {
      sink(written, std::move(rows));
    } catch (...) {
      std::lock_guard<std::mutex> lk(m);
      if (!error) error = std::current_exception();
      stop = true;
      break;
    }
  }
  {
    std::lock_guard<std::mutex> lk(m);
    if (written < n) stop = true;
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  if (written < n) throw Interrupted();
}

std::size_t write_records(std::ostream& os, const std::vector<json>& rows) {
  std::string buf;
  for (const json& r : rows) {
    buf += r.dump();
    buf += '\n';
  }
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  os.flush();
  return rows.size();
}

std::vector<json> read_records(std::istream& is) {
  const std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  std::vector<json> rows;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) break;
    if (nl > pos) rows.push_back(json::parse(text.begin() + static_cast<std::ptrdiff_t>(pos),
                                             text.begin() + static_cast<std::ptrdiff_t>(nl)));
    pos = nl + 1;
  }
  return rows;
}

namespace {

std::string csv_number(double x) {
  if (std::isnan(x)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json read_json_file(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw SinkError("cannot read " + p.string());
  return json::parse(is);
}

void write_json_atomic(const fs::path& p, const json& j) {
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::trunc);
    if (!os) throw SinkError("cannot write " + tmp.string());
    os << j.dump() << '\n';
    if (!os) throw SinkError("write failed for " + tmp.string());
  }
  fs::rename(tmp, p);
}

}  // namespace

void write_summary_csv(const fs::path& file, const std::vector<SummaryRow>& rows) {
  std::ofstream os(file, std::ios::trunc);
  if (!os) throw SinkError("cannot write " + file.string());
  os << "metric,epsilon,delta,lambda,t,value,std_error\n";
  for (const auto& r : rows) {
    os << csv_text(r.metric) << ',' << csv_number(r.epsilon) << ',' << csv_number(r.delta) << ','
       << csv_number(r.lambda) << ',' << csv_number(r.t) << ',' << csv_number(r.value) << ','
       << csv_number(r.std_error) << '\n';
  }
  if (!os) throw SinkError("write failed for " + file.string());
}

StageRunner::StageRunner(const ExperimentConfig& config, fs::path out_dir, unsigned threads, bool resume)
    : config_(config), out_(std::move(out_dir)), threads_(threads == 0 ? 1 : threads), resume_(resume),
      fingerprint_(config_fingerprint(config)) {
  std::error_code ec;
  fs::create_directories(out_, ec);
  if (ec) throw SinkError("cannot create output directory " + out_.string() + ": " + ec.message());
}

std::vector<json> StageRunner::run_stage(const std::string& name, std::size_t tasks, const TaskFn& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  StageLog entry;
  entry.name = name;
  entry.tasks = tasks;
  entry.tag = 100 + log_.size();

  const fs::path file = out_ / (name + ".jsonl");
  const fs::path marker = file.string() + ".partial";
  const fs::path done = file.string() + ".done";

  std::vector<json> rows;
  std::size_t start = 0;
  std::uintmax_t bytes = 0;

  if (resume_ && fs::exists(done) && fs::exists(file)) {
    const json d = read_json_file(done);
    if (d.value("fingerprint", "") == fingerprint_ && d.value("tasks", std::size_t{0}) == tasks) {
      std::ifstream is(file);
      rows = read_records(is);
      entry.resumed_tasks = tasks;
      entry.wall_seconds = 0.0;
      log_.push_back(entry);
      return rows;
    }
  }
  if (resume_ && fs::exists(marker) && fs::exists(file)) {
    const json m = read_json_file(marker);
    if (m.value("fingerprint", "") == fingerprint_ && m.value("tasks", std::size_t{0}) == tasks) {
      start = m.value("tasks_done", std::size_t{0});
      bytes = m.value("bytes", std::uintmax_t{0});
      if (fs::file_size(file) < bytes) {
        start = 0;
        bytes = 0;
      } else {
        fs::resize_file(file, bytes);
        std::ifstream is(file);
        rows = read_records(is);
      }
    }
  }
  std::error_code ec;
  fs::remove(done, ec);
  if (start == 0) {
    rows.clear();
    bytes = 0;
  }
  entry.resumed_tasks = start;

  std::ofstream os(file, start == 0 ? std::ios::trunc : std::ios::app);
  if (!os) throw SinkError("cannot open " + file.string() + " for writing");
  auto write_marker = [&](std::size_t tasks_done) {
    json m;
    m["fingerprint"] = fingerprint_;
    m["stage"] = name;
    m["tasks"] = tasks;
    m["tasks_done"] = tasks_done;
    m["bytes"] = bytes;
    write_json_atomic(marker, m);
  };
  write_marker(start);

  const std::uint64_t master = config_.seed;
  const std::uint64_t tag = entry.tag;
  auto run_one = [&](std::size_t i) {
    const std::size_t k = start + i;
    return fn(TaskContext{k, derive_seed(master, k, tag)});
  };
  auto sink = [&](std::size_t i, std::vector<json>&& batch) {
    std::string buf;
    for (const json& r : batch) {
      buf += r.dump();
      buf += '\n';
    }
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    os.flush();
    if (!os) throw SinkError("write failed for " + file.string());
    bytes += buf.size();
    for (auto& r : batch) rows.push_back(std::move(r));
    write_marker(start + i + 1);
  };
  parallel_ordered(tasks - start, threads_, run_one, sink);
  os.close();

  json d;
  d["fingerprint"] = fingerprint_;
  d["stage"] = name;
  d["tasks"] = tasks;
  d["bytes"] = bytes;
  write_json_atomic(done, d);
  fs::remove(marker, ec);

  entry.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  log_.push_back(entry);
  return rows;
}

Verdict verdict(std::string name, double statistic, double threshold, bool pass, std::string note) {
  Verdict v;
  v.name = std::move(name);
  v.statistic = statistic;
  v.threshold = threshold;
  v.pass = pass;
  v.note = std::move(note);
  return v;
}

}  // namespace trapkit::driver
