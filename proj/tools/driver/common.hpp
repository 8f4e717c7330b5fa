#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "driver/config.hpp"
#include "driver/runner.hpp"
#include "trapkit/dynamics.hpp"
#include "trapkit/env.hpp"
#include "trapkit/lattice.hpp"

namespace trapkit::driver {

/// Fresh environment for a replica: the configured law and dimension with
/// a seed derived from the task seed.
Environment replica_env(const ExperimentConfig& c, std::uint64_t task_seed);
WalkStreams replica_streams(std::uint64_t task_seed);

/// Test function h of the environment seen from a site, never reading the
/// depth at the site itself. `tau(offset)` returns the depth at site + offset.
struct TestFunction {
  std::string name;
  /// Largest |offset| read, so callers can size windows.
  int reach = 1;
  std::function<double(const std::function<double(const Site&)>& tau)> h;
};

/// Known names: "inv1p-e1" (1 + tau_{e1})^{-1}, "exp-pair" exp(-(tau_{e1} + tau_{-e1}) / 10),
/// "ratio-2e1" tau_{2e1} / (1 + tau_{2e1}).
TestFunction test_function(const std::string& name);
double evaluate(const TestFunction& f, const Environment& env, const Site& at);
double evaluate(const TestFunction& f, const EnvWindow& window);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

Estimate mean_estimate(const std::vector<double>& v);

/// G-bar_n of fresh environments, one task per draw.
/// Rows: {"k", "gbar", "iterations"}.
std::vector<double> greenbar_pool_stage(StageRunner& runner, const std::string& name, std::size_t reps, int n);

/// Per-walk estimates (r(T) - r(T/2)) / (T/2) of the range constant c.
/// Rows: {"replica", "horizon", "r_half", "r_full", "slope"}.
std::vector<double> range_constant_stage(StageRunner& runner, const std::string& name, std::size_t reps, double horizon);

/// Distance correlation test as a verdict: passes when independence is not rejected.
Verdict independence_verdict(const std::string& name, const std::vector<double>& x, const std::vector<double>& y,
                             std::uint64_t seed, double level = 0.05);

std::string fmt(double x);
/// Grid-point suffix for verdict names: "eps=0.001" or "eps=0.001 delta=1".
std::string grid_tag(double epsilon);
std::string grid_tag(double epsilon, double delta);

}  // namespace trapkit::driver
