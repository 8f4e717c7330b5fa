#pragma once

#include <cstddef>
#include <vector>

namespace trapkit {

/// Vertex of a completed graph.
struct GraphPoint {
  double t;
  double v;
};

/// A nondecreasing cadlag function on [0, T] stored as its completed graph:
/// a polyline whose vertices are nondecreasing in both time and value.
/// Two consecutive vertices with equal time form a jump; the function value
/// at a jump time is the top of the jump (right-continuity).
class MonotonePath {
 public:
  MonotonePath() = default;
  /// Throws std::invalid_argument unless vertices are nondecreasing in both coordinates.
  explicit MonotonePath(std::vector<GraphPoint> points);

  /// Identity-like ramp from (0, 0) to (T, slope*T).
  static MonotonePath linear(double horizon, double slope = 1.0);
  /// h * 1{t >= jump_at} on [0, horizon].
  static MonotonePath step(double jump_at, double height, double horizon);

  const std::vector<GraphPoint>& points() const { return pts_; }
  bool empty() const { return pts_.empty(); }
  double start_time() const { return pts_.front().t; }
  double end_time() const { return pts_.back().t; }

  /// f(t), right-continuous.
  double value_at(double t) const;
  /// f(t-); equals value_at(0) at t = 0.
  double left_limit(double t) const;
  /// Right-continuous generalized inverse inf{s : f(s) > level}.
  /// Throws std::out_of_range when the level is never exceeded.
  double inverse(double level) const;

  /// Restriction to [start, horizon], extended flat when horizon > end_time().
  MonotonePath restricted(double horizon) const;

 private:
  std::vector<GraphPoint> pts_;
};

/// max over [0, horizon] of |f - g|, computed exactly over merged breakpoints.
double sup_distance(const MonotonePath& f, const MonotonePath& g, double horizon);

}  // namespace trapkit
