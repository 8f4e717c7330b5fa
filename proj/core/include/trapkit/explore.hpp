#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <unordered_set>
#include <vector>

#include "trapkit/dynamics.hpp"
#include "trapkit/env.hpp"
#include "trapkit/green.hpp"
#include "trapkit/lattice.hpp"
#include "trapkit/paths.hpp"

namespace trapkit {

/// Hash set of lattice sites. Coordinates are packed into one 64-bit key
/// (64/d bits per axis) in an open-addressing table; the rare sites whose
/// coordinates do not fit go to an ordinary node-based set.
class SiteSet {
 public:
  SiteSet(int dim, std::size_t expected = 64);
  /// True when `s` was not present.
  bool insert(const Site& s);
  bool contains(const Site& s) const;
  std::size_t size() const { return size_ + overflow_.size(); }

 private:
  bool pack(const Site& s, std::uint64_t& key) const;
  std::size_t slot_of(std::uint64_t key) const;
  void grow();

  int dim_;
  int bits_;
  std::int64_t bias_;
  std::vector<std::uint64_t> slots_;
  std::size_t size_ = 0;
  std::size_t mask_ = 0;
  std::unordered_set<Site, SiteHash> overflow_;
};

/// Distinct sites of the closed 1-neighbourhood of a trajectory in order of
/// first appearance. At each visited position the offsets are enumerated in
/// the order of neighbourhood_offsets (lexicographic).
struct DiscoveryState {
  int dim = 1;
  std::vector<Site> sites;
  /// X-hat time of discovery (entry time of the segment that revealed it).
  std::vector<double> times;
  /// Index of the path segment that revealed the site.
  std::vector<std::size_t> segment;

  std::size_t size() const { return sites.size(); }
};

/// Exploration of a path. With `until`, only positions entered at times
/// <= until are scanned.
DiscoveryState discovery_sequence(const PathSample& path, std::optional<double> until = std::nullopt);

/// r(t): number of sites discovered by time t. Right-continuous step function.
struct RangeProcess {
  /// Distinct discovery times, increasing; counts[k] = r(times[k]).
  std::vector<double> times;
  std::vector<std::size_t> counts;

  std::size_t at(double t) const;
  /// Largest single jump size (the initial value counts as a jump from 0).
  std::size_t max_jump() const;
};

RangeProcess range_process(const DiscoveryState& state);

/// X-hat time spent at `site` over [0, min(t, horizon)].
double local_time(const PathSample& path, const Site& site, double t);
/// Total X-hat time at each of `sites` over the whole path, in one pass.
std::vector<double> local_times(const PathSample& path, const std::vector<Site>& sites);

/// s -> l(site, s / epsilon) on [0, epsilon * horizon] as a monotone path.
MonotonePath local_time_path(const PathSample& path, const Site& site, double epsilon);

struct DeepTrapRecord {
  std::size_t n = 0;
  Site site;
  /// X-hat time at which the trap was discovered.
  double discovery_time = 0.0;
  double depth = 0.0;
  /// epsilon^{1/alpha} * depth.
  double scaled_depth = 0.0;
  /// Total X-hat time at the site, truncated at the horizon.
  double local_time = 0.0;
  bool visited = false;
  /// local_time / green_at_trap when visited and a Green solve was requested.
  std::optional<double> excess;
  /// G_n of the environment seen from the trap.
  std::optional<double> green_at_trap;
  /// G-bar_n of the same environment.
  std::optional<double> green_bar;
  /// Depths around the trap, center masked.
  std::optional<EnvWindow> env_window;
};

struct DeepTrapOptions {
  double epsilon = 1e-3;
  double delta = 1.0;
  DynamicsSpec spec;
  /// Only traps discovered at X-hat time <= cutoff are reported.
  std::optional<double> discovery_cutoff;
  /// Box radius for G_n at the trap; 0 skips the solve.
  int green_box = 0;
  bool with_green_bar = false;
  /// Radius of the stored environment window; 0 stores none.
  int record_window_radius = 1;
  SolverOptions solver;
};

/// Deep traps (epsilon^{1/alpha} tau >= delta) in discovery order.
std::vector<DeepTrapRecord> collect_deep_traps(const PathSample& path, const Environment& env,
                                               const DeepTrapOptions& opts);
std::vector<DeepTrapRecord> collect_deep_traps(const PathSample& path, const DiscoveryState& state,
                                               const Environment& env, const DeepTrapOptions& opts);

/// Weight for restricted_additive_functional.
struct AdditiveWeight {
  enum class Kind { Depth, TestFunction };
  Kind kind = Kind::Depth;
  /// h(theta_x tau); must not depend on tau at x itself.
  std::function<double(const Environment&, const Site&)> h;

  static AdditiveWeight depth() { return {}; }
  static AdditiveWeight test_function(std::function<double(const Environment&, const Site&)> fn) {
    return {Kind::TestFunction, std::move(fn)};
  }
};

/// Depth weight: H_delta^(eps)(t) = eps^{1/alpha} int_0^{t/eps} tau 1{deep} ds.
/// Test-function weight: L_delta^(eps)(t) = int_0^{t/eps} h(theta tau) 1{deep} ds.
/// `t` is in rescaled time; throws when t / eps exceeds the horizon.
double restricted_additive_functional(const PathSample& path, const Environment& env,
                                      const AdditiveWeight& weight, double epsilon, double delta,
                                      double t);

/// t -> H_delta^(eps)(t) on [0, eps * horizon] (delta = 0 gives H^(eps)).
MonotonePath restricted_clock_path(const PathSample& path, const Environment& env, double epsilon,
                                   double delta);

/// t -> H^(eps)(t) on [0, eps * horizon] from a clock.
MonotonePath rescaled_clock_path(const ClockPath& clock, double epsilon, double alpha);

/// The one-jump function l * 1{t >= eps T} on [0, horizon] (rescaled time).
MonotonePath step_approximation(const DeepTrapRecord& record, double epsilon, double horizon);

}  // namespace trapkit
