#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "trapkit/env.hpp"
#include "trapkit/lattice.hpp"
#include "trapkit/paths.hpp"
#include "trapkit/rng.hpp"

namespace trapkit {

enum class Variant { BouchaudA, Metropolis, HeatBath };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);

struct DynamicsSpec {
  Variant variant = Variant::BouchaudA;
  /// Only used by BouchaudA.
  double a = 0.3;

  static DynamicsSpec bouchaud(double a) { return {Variant::BouchaudA, a}; }
  static DynamicsSpec metropolis() { return {Variant::Metropolis, 0.0}; }
  static DynamicsSpec heat_bath() { return {Variant::HeatBath, 0.0}; }

  void validate() const;
  friend bool operator==(const DynamicsSpec&, const DynamicsSpec&) = default;
};

/// Jump rate of X from a site of depth tau_x to a neighbour of depth tau_y.
///   BouchaudA:  tau_y^a / tau_x^(1-a)
///   Metropolis: min(1, tau_y / tau_x)
///   HeatBath:   (1 + tau_x / tau_y)^-1
double jump_rate(double tau_x, double tau_y, const DynamicsSpec& spec);

/// Symmetric conductance tau_x * jump_rate(tau_x, tau_y): the jump rate of
/// the time-changed walk. Bit-exact symmetric in its two depth arguments.
double edge_conductance(double tau_x, double tau_y, const DynamicsSpec& spec);

struct Jump {
  double time;
  Site site;
};

/// Trajectory of a continuous-time nearest-neighbour walk: start site,
/// strictly increasing jump times, and the simulated horizon. The position is
/// cadlag; the walk sits at the last site on [last jump, horizon].
struct PathSample {
  int dim = 1;
  Site start;
  std::vector<Jump> jumps;
  double horizon = 0.0;

  std::size_t steps() const { return jumps.size(); }
  /// Site occupied during the k-th holding interval (k = 0 is the start).
  const Site& site(std::size_t k) const { return k == 0 ? start : jumps[k - 1].site; }
  double entry_time(std::size_t k) const { return k == 0 ? 0.0 : jumps[k - 1].time; }
  double exit_time(std::size_t k) const { return k < jumps.size() ? jumps[k].time : horizon; }
  std::size_t segments() const { return jumps.size() + 1; }

  Site position_at(double t) const;
  /// Index k of the holding interval containing t.
  std::size_t segment_at(double t) const;
};

/// A(t) = int_0^t tau_{X_s} ds for a simulated path: piecewise linear with
/// slope tau on each holding interval.
class ClockPath {
 public:
  ClockPath() = default;
  /// breakpoints[k] is the entry time of segment k (breakpoints[0] == 0).
  ClockPath(std::vector<double> breakpoints, std::vector<double> slopes, double horizon);
  static ClockPath from_path(const PathSample& path, const Environment& env);

  const std::vector<double>& breakpoints() const { return breaks_; }
  const std::vector<double>& slopes() const { return slopes_; }
  const std::vector<double>& cumulative() const { return cum_; }
  double horizon() const { return horizon_; }
  /// A(horizon).
  double total() const { return cum_.back() + slopes_.back() * (horizon_ - breaks_.back()); }

  double value_at(double t) const;
  /// Exact piecewise-linear inverse on [0, A(horizon)].
  double inverse_at(double a) const;

  MonotonePath as_path() const;

 private:
  std::vector<double> breaks_;
  std::vector<double> slopes_;
  std::vector<double> cum_;
  double horizon_ = 0.0;
};

/// Stop the simulation at whichever bound is reached first.
struct StopRule {
  std::optional<std::size_t> max_steps;
  /// Bound on the walk's own time (X-hat time, or X time for the direct walk).
  std::optional<double> max_time;
  /// Bound on the clock A (time-changed walk only): stop once A reaches it.
  std::optional<double> max_clock;

  static StopRule steps(std::size_t n) { return {n, std::nullopt, std::nullopt}; }
  static StopRule time(double t) { return {std::nullopt, t, std::nullopt}; }
  static StopRule clock(double a) { return {std::nullopt, std::nullopt, a}; }
  void validate() const;
};

/// Separate streams for holding times and for next-site choices, so that
/// two simulations can share the embedded chain.
struct WalkStreams {
  RngStream holding;
  RngStream jumps;

  static WalkStreams derived(std::uint64_t master, std::uint64_t replica) {
    return {RngStream(derive_seed(master, replica, 1)), RngStream(derive_seed(master, replica, 2))};
  }
};

struct TimeChangedWalk {
  PathSample path;
  ClockPath clock;
};

/// Event-driven simulation of X-hat: exponential holding with total rate
/// sum_y c(x, y), next site proportional to the conductances.
/// With a step bound the final holding time is drawn and the walk stops
/// just before its next jump, so every segment has a full holding time.
/// Throws std::runtime_error if the bound leaves the path without any jump.
TimeChangedWalk simulate_time_changed_walk(const Environment& env, const DynamicsSpec& spec,
                                           const StopRule& stop, WalkStreams& streams,
                                           Site start = Site::origin());

/// Direct simulation of X with holding rate sum_y jump_rate(tau_x, tau_y).
/// Next sites use the same conductance weights as the time-changed walk, so
/// shared jump streams give identical embedded chains.
PathSample simulate_direct_walk(const Environment& env, const DynamicsSpec& spec,
                                const StopRule& stop, WalkStreams& streams,
                                Site start = Site::origin());

/// A^{-1}(a); throws std::out_of_range beyond A(horizon).
double clock_inverse_at(const ClockPath& clock, double a);

/// t -> H^(eps)(t) = eps^{1/alpha} A(t / eps).
class RescaledClock {
 public:
  RescaledClock(const ClockPath& clock, double epsilon, double alpha);
  /// Throws std::out_of_range when t / eps exceeds the horizon.
  double operator()(double t) const;
  double span() const;

 private:
  const ClockPath* clock_;
  double eps_;
  double scale_;
};

RescaledClock rescaled_clock(const ClockPath& clock, double epsilon, double alpha);

/// X(t) = X-hat(A^{-1}(t)) for a simulated time-changed walk.
Site direct_position(const TimeChangedWalk& walk, double t);

}  // namespace trapkit
