#include "driver/common.hpp"

#include <cmath>
#include <cstdio>

#include "trapkit/explore.hpp"
#include "trapkit/green.hpp"
#include "trapkit/rng.hpp"
#include "trapkit/stats.hpp"
#include "trapkit/summary.hpp"

namespace trapkit::driver {

Environment replica_env(const ExperimentConfig& c, std::uint64_t task_seed) {
  EnvParams p = c.env;
  p.seed = derive_seed(task_seed, 0, 1);
  return Environment(p);
}

WalkStreams replica_streams(std::uint64_t task_seed) { return WalkStreams::derived(task_seed, 1); }

TestFunction test_function(const std::string& name) {
  using Tau = std::function<double(const Site&)>;
  if (name == "inv1p-e1") {
    return {name, 1, [](const Tau& tau) { return 1.0 / (1.0 + tau(Site::unit(0))); }};
  }
  if (name == "exp-pair") {
    return {name, 1, [](const Tau& tau) { return std::exp(-(tau(Site::unit(0)) + tau(Site::unit(0, -1))) / 10.0); }};
  }
  if (name == "ratio-2e1") {
    return {name, 2, [](const Tau& tau) {
              Site s;
              s[0] = 2;
              const double t = tau(s);
              return t / (1.0 + t);
            }};
  }
  throw ConfigError("unknown test function '" + name + "'");
}

double evaluate(const TestFunction& f, const Environment& env, const Site& at) {
  return f.h([&](const Site& off) { return env.tau_at(at + off); });
}

double evaluate(const TestFunction& f, const EnvWindow& window) {
  if (window.radius() < f.reach) throw std::invalid_argument("window too small for test function " + f.name);
  return f.h([&](const Site& off) { return window.at(off); });
}

Estimate mean_estimate(const std::vector<double>& v) {
  EmpiricalSummary s(false);
  for (double x : v) s.add(x);
  Estimate e;
  e.n = v.size();
  e.value = v.empty() ? 0.0 : s.mean();
  e.std_error = v.size() > 1 ? s.std_error() : 0.0;
  return e;
}

std::vector<double> greenbar_pool_stage(StageRunner& runner, const std::string& name, std::size_t reps, int n) {
  const ExperimentConfig& c = runner.config();
  const auto rows = runner.run_stage(name, reps, [&c, n](const TaskContext& ctx) {
    const Environment env = replica_env(c, ctx.seed);
    const EnvWindow w = env.window(Site::origin(), n + 1, true);
    const GreenEstimate g = green_bar(w, n, c.dynamics);
    json r;
    r["k"] = ctx.index;
    r["gbar"] = g.value;
    r["iterations"] = g.iterations;
    return std::vector<json>{r};
  });
  std::vector<double> pool;
  pool.reserve(rows.size());
  for (const auto& r : rows) pool.push_back(r.at("gbar").get<double>());
  return pool;
}

std::vector<double> range_constant_stage(StageRunner& runner, const std::string& name, std::size_t reps, double horizon) {
  const ExperimentConfig& c = runner.config();
  const auto rows = runner.run_stage(name, reps, [&c, horizon](const TaskContext& ctx) {
    const Environment env = replica_env(c, ctx.seed);
    WalkStreams st = replica_streams(ctx.seed);
    const auto walk = simulate_time_changed_walk(env, c.dynamics, StopRule::time(horizon), st);
    const RangeProcess r = range_process(discovery_sequence(walk.path));
    json row;
    row["replica"] = ctx.index;
    row["horizon"] = horizon;
    row["r_half"] = r.at(horizon / 2.0);
    row["r_full"] = r.at(horizon);
    row["slope"] = (static_cast<double>(r.at(horizon)) - static_cast<double>(r.at(horizon / 2.0))) / (horizon / 2.0);
    return std::vector<json>{row};
  });
  std::vector<double> slopes;
  for (const auto& r : rows) slopes.push_back(r.at("slope").get<double>());
  return slopes;
}

Verdict independence_verdict(const std::string& name, const std::vector<double>& x, const std::vector<double>& y,
                             std::uint64_t seed, double level) {
  RngStream rng(seed);
  const IndependenceResult r = independence_statistic(x, y, rng);
  return verdict(name, r.p_value, level, r.p_value >= level,
                 "distance correlation " + fmt(r.dcor) + ", n = " + std::to_string(x.size()));
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

std::string grid_tag(double epsilon) { return "eps=" + fmt(epsilon); }
std::string grid_tag(double epsilon, double delta) { return grid_tag(epsilon) + " delta=" + fmt(delta); }

}  // namespace trapkit::driver
