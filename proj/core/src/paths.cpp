#include "trapkit/paths.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace trapkit {

MonotonePath::MonotonePath(std::vector<GraphPoint> points) : pts_(std::move(points)) {
  if (pts_.empty()) throw std::invalid_argument("monotone path needs at least one vertex");
  for (std::size_t i = 1; i < pts_.size(); ++i) {
    if (pts_[i].t < pts_[i - 1].t || pts_[i].v < pts_[i - 1].v) {
      throw std::invalid_argument("monotone path vertices must be nondecreasing (vertex " +
                                  std::to_string(i) + ")");
    }
  }
}

MonotonePath MonotonePath::linear(double horizon, double slope) {
  return MonotonePath({{0.0, 0.0}, {horizon, slope * horizon}});
}

MonotonePath MonotonePath::step(double jump_at, double height, double horizon) {
  if (height == 0.0) return MonotonePath({{0.0, 0.0}, {horizon, 0.0}});
  if (jump_at >= horizon) return MonotonePath({{0.0, 0.0}, {horizon, 0.0}});
  if (jump_at <= 0.0) return MonotonePath({{0.0, 0.0}, {0.0, height}, {horizon, height}});
  return MonotonePath({{0.0, 0.0}, {jump_at, 0.0}, {jump_at, height}, {horizon, height}});
}

double MonotonePath::value_at(double t) const {
  // Last vertex with time <= t; ties resolve to the top of a jump.
  auto it = std::upper_bound(pts_.begin(), pts_.end(), t,
                             [](double x, const GraphPoint& p) { return x < p.t; });
  if (it == pts_.begin()) return pts_.front().v;
  const GraphPoint& a = *(it - 1);
  if (it == pts_.end() || a.t == t) return a.v;
  const GraphPoint& b = *it;
  return a.v + (b.v - a.v) * (t - a.t) / (b.t - a.t);
}

double MonotonePath::left_limit(double t) const {
  // First vertex with time >= t; approaching from the left uses its predecessor segment.
  auto it = std::lower_bound(pts_.begin(), pts_.end(), t,
                             [](const GraphPoint& p, double x) { return p.t < x; });
  if (it == pts_.begin()) return pts_.front().v;
  if (it == pts_.end()) return pts_.back().v;
  const GraphPoint& a = *(it - 1);
  const GraphPoint& b = *it;
  if (b.t == t) return b.v;
  return a.v + (b.v - a.v) * (t - a.t) / (b.t - a.t);
}

double MonotonePath::inverse(double level) const {
  if (pts_.front().v > level) return pts_.front().t;
  for (std::size_t j = 1; j < pts_.size(); ++j) {
    const GraphPoint& a = pts_[j - 1];
    const GraphPoint& b = pts_[j];
    if (b.v > level) {
      if (b.t == a.t) return a.t;
      const double s = a.t + (level - a.v) * (b.t - a.t) / (b.v - a.v);
      return std::clamp(s, a.t, b.t);
    }
  }
  throw std::out_of_range("level " + std::to_string(level) + " not exceeded on the path span");
}

MonotonePath MonotonePath::restricted(double horizon) const {
  std::vector<GraphPoint> out;
  for (const auto& p : pts_) {
    if (p.t > horizon) break;
    out.push_back(p);
  }
  if (out.empty()) return MonotonePath({{horizon, pts_.front().v}});
  if (out.back().t < horizon) out.push_back({horizon, value_at(horizon)});
  return MonotonePath(std::move(out));
}

double sup_distance(const MonotonePath& f, const MonotonePath& g, double horizon) {
  std::vector<double> ts{0.0, horizon};
  for (const auto& p : f.points()) {
    if (p.t >= 0.0 && p.t <= horizon) ts.push_back(p.t);
  }
  for (const auto& p : g.points()) {
    if (p.t >= 0.0 && p.t <= horizon) ts.push_back(p.t);
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  double d = 0.0;
  for (double t : ts) {
    d = std::max(d, std::abs(f.value_at(t) - g.value_at(t)));
    if (t > 0.0) d = std::max(d, std::abs(f.left_limit(t) - g.left_limit(t)));
  }
  return d;
}

}  // namespace trapkit
