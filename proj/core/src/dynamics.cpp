#include "trapkit/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "trapkit/rng.hpp"

namespace trapkit {

namespace {

double ulp_of(double x) { return std::nextafter(std::abs(x), INFINITY) - std::abs(x); }

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::BouchaudA: return "bouchaud";
    case Variant::Metropolis: return "metropolis";
    case Variant::HeatBath: return "heat-bath";
  }
  return "unknown";
}

Variant variant_from_string(const std::string& name) {
  if (name == "bouchaud") return Variant::BouchaudA;
  if (name == "metropolis") return Variant::Metropolis;
  if (name == "heat-bath") return Variant::HeatBath;
  throw std::invalid_argument("unknown dynamics variant '" + name + "'");
}

void DynamicsSpec::validate() const {
  if (variant == Variant::BouchaudA && !(a >= 0.0 && a <= 1.0)) {
    throw std::invalid_argument("dynamics parameter a must lie in [0, 1]");
  }
}

double jump_rate(double tau_x, double tau_y, const DynamicsSpec& spec) {
  switch (spec.variant) {
    case Variant::BouchaudA: return std::pow(tau_y, spec.a) / std::pow(tau_x, 1.0 - spec.a);
    case Variant::Metropolis: return std::min(1.0, tau_y / tau_x);
    case Variant::HeatBath: return 1.0 / (1.0 + tau_x / tau_y);
  }
  return 0.0;
}

double edge_conductance(double tau_x, double tau_y, const DynamicsSpec& spec) {
  switch (spec.variant) {
    // Products and sums of the two per-site terms commute exactly, which
    // keeps the conductance bit-symmetric and avoids overflow in tau_x*tau_y.
    case Variant::BouchaudA:
      if (spec.a == 0.0) return 1.0;
      return std::pow(tau_x, spec.a) * std::pow(tau_y, spec.a);
    case Variant::Metropolis: return std::min(tau_x, tau_y);
    case Variant::HeatBath: return 1.0 / (1.0 / tau_x + 1.0 / tau_y);
  }
  return 0.0;
}

Site PathSample::position_at(double t) const { return site(segment_at(t)); }

std::size_t PathSample::segment_at(double t) const {
  auto it = std::upper_bound(jumps.begin(), jumps.end(), t,
                             [](double x, const Jump& j) { return x < j.time; });
  return static_cast<std::size_t>(it - jumps.begin());
}

ClockPath::ClockPath(std::vector<double> breakpoints, std::vector<double> slopes, double horizon)
    : breaks_(std::move(breakpoints)), slopes_(std::move(slopes)), horizon_(horizon) {
  if (breaks_.empty() || breaks_.size() != slopes_.size() || breaks_.front() != 0.0) {
    throw std::invalid_argument("clock needs matching breakpoints/slopes starting at 0");
  }
  cum_.resize(breaks_.size());
  cum_[0] = 0.0;
  for (std::size_t k = 1; k < breaks_.size(); ++k) {
    cum_[k] = cum_[k - 1] + slopes_[k - 1] * (breaks_[k] - breaks_[k - 1]);
  }
}

ClockPath ClockPath::from_path(const PathSample& path, const Environment& env) {
  std::vector<double> b(path.segments()), s(path.segments());
  for (std::size_t k = 0; k < path.segments(); ++k) {
    b[k] = path.entry_time(k);
    s[k] = env.tau_at(path.site(k));
  }
  return ClockPath(std::move(b), std::move(s), path.horizon);
}

double ClockPath::value_at(double t) const {
  if (t < 0.0 || t > horizon_) throw std::out_of_range("clock evaluated outside [0, horizon]");
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - breaks_.begin()) - 1;
  return cum_[k] + slopes_[k] * (t - breaks_[k]);
}

double ClockPath::inverse_at(double a) const {
  // A clock-bounded walk ends where A reaches the bound, but the horizon is
  // rounded to the grid of t, so A(horizon) can fall short by up to the last
  // slope times an ulp of the horizon.
  const double slack = 4.0 * (slopes_.back() * ulp_of(horizon_) + ulp_of(total()));
  if (a > total() && a <= total() + slack) a = total();
  if (a < 0.0 || a > total()) throw std::out_of_range("clock inverse evaluated beyond A(horizon)");
  auto it = std::upper_bound(cum_.begin(), cum_.end(), a);
  const std::size_t k = static_cast<std::size_t>(it - cum_.begin()) - 1;
  const double t = breaks_[k] + (a - cum_[k]) / slopes_[k];
  return std::min(t, k + 1 < breaks_.size() ? breaks_[k + 1] : horizon_);
}

MonotonePath ClockPath::as_path() const {
  std::vector<GraphPoint> pts;
  pts.reserve(breaks_.size() + 1);
  for (std::size_t k = 0; k < breaks_.size(); ++k) pts.push_back({breaks_[k], cum_[k]});
  pts.push_back({horizon_, total()});
  return MonotonePath(std::move(pts));
}

void StopRule::validate() const {
  if (!max_steps && !max_time && !max_clock) throw std::invalid_argument("stop rule has no bound");
  if (max_steps && *max_steps == 0) throw std::invalid_argument("step bound must be positive");
  if (max_time && !(*max_time > 0.0)) throw std::invalid_argument("time bound must be positive");
  if (max_clock && !(*max_clock > 0.0)) throw std::invalid_argument("clock bound must be positive");
}

namespace {

enum class Mode { TimeChanged, Direct };

// Direct-mapped memo of (tau, tau^a) for recently seen sites. About half
// the neighbours looked up by a walk in d >= 3 were looked up before.
class DepthCache {
 public:
  DepthCache(const Environment& env, double a, bool with_power)
      : env_(env), a_(a), with_power_(with_power), dim_(env.dim()),
        bits_(std::min(32, 64 / env.dim())), keys_(kSize, kEmpty), tau_(kSize), pow_(kSize) {}

  void lookup(const Site& s, double& tau, double& pw) {
    std::uint64_t key;
    if (!pack(s, key)) {
      compute(s, tau, pw);
      return;
    }
    const std::size_t i = mix64(key) & (kSize - 1);
    if (keys_[i] != key) {
      compute(s, tau_[i], pow_[i]);
      keys_[i] = key;
    }
    tau = tau_[i];
    pw = pow_[i];
  }

 private:
  static constexpr std::size_t kSize = std::size_t{1} << 14;
  static constexpr std::uint64_t kEmpty = ~std::uint64_t{0};

  void compute(const Site& s, double& tau, double& pw) const {
    tau = env_.tau_at(s);
    pw = with_power_ ? std::pow(tau, a_) : 0.0;
  }

  bool pack(const Site& s, std::uint64_t& key) const {
    const std::int64_t bias = std::int64_t{1} << (bits_ - 1);
    const std::int64_t top = (std::int64_t{1} << bits_) - 1;
    key = 0;
    for (int i = 0; i < dim_; ++i) {
      const std::int64_t c = static_cast<std::int64_t>(s[i]) + bias;
      if (c < 0 || c >= top) return false;
      key |= static_cast<std::uint64_t>(c) << (bits_ * i);
    }
    return true;
  }

  const Environment& env_;
  double a_;
  bool with_power_;
  int dim_;
  int bits_;
  std::vector<std::uint64_t> keys_;
  std::vector<double> tau_;
  std::vector<double> pow_;
};

struct RawWalk {
  PathSample path;
  std::vector<double> slopes;
};

RawWalk run_walk(const Environment& env, const DynamicsSpec& spec, const StopRule& stop,
                 WalkStreams& streams, Site start, Mode mode) {
  spec.validate();
  stop.validate();
  if (mode == Mode::Direct && stop.max_clock) {
    throw std::invalid_argument("clock bound applies to the time-changed walk only");
  }
  const int d = env.dim();
  const int ndir = 2 * d;
  RawWalk out;
  out.path.dim = d;
  out.path.start = start;
  if (stop.max_steps) {
    out.path.jumps.reserve(*stop.max_steps);
    out.slopes.reserve(*stop.max_steps + 1);
  }

  std::array<double, 2 * kMaxDim> nb_tau{};
  std::array<double, 2 * kMaxDim> nb_pow{};
  std::array<double, 2 * kMaxDim> cond{};
  // For the a-dynamics the conductance factorizes as tau_x^a * tau_y^a; one
  // pow per site reproduces edge_conductance bit for bit.
  const bool factorized = spec.variant == Variant::BouchaudA && spec.a != 0.0;
  DepthCache cache(env, spec.a, factorized);
  Site x = start;
  double tx, px;
  cache.lookup(x, tx, px);
  double t = 0.0;
  double clock = 0.0;

  for (;;) {
    double total = 0.0;
    double direct_rate = 0.0;
    for (int dir = 0; dir < ndir; ++dir) {
      cache.lookup(neighbour(x, dir), nb_tau[dir], nb_pow[dir]);
      if (factorized) {
        cond[dir] = px * nb_pow[dir];
      } else {
        cond[dir] = edge_conductance(tx, nb_tau[dir], spec);
      }
      total += cond[dir];
      if (mode == Mode::Direct) direct_rate += jump_rate(tx, nb_tau[dir], spec);
    }
    const double rate = mode == Mode::Direct ? direct_rate : total;
    const double hold = streams.holding.exponential() / rate;
    out.slopes.push_back(tx);

    if (stop.max_time && t + hold >= *stop.max_time) {
      out.path.horizon = *stop.max_time;
      break;
    }
    // A accumulates over the stored entry times exactly as ClockPath does,
    // so the bound seen here is the one the clock path reports.
    const double t_next = t + hold;
    const double clock_next = clock + tx * (t_next - t);
    if (stop.max_clock && clock_next >= *stop.max_clock) {
      out.path.horizon = std::max(t, t + (*stop.max_clock - clock) / tx);
      break;
    }
    t = t_next;
    clock = clock_next;
    if (stop.max_steps && out.path.jumps.size() == *stop.max_steps) {
      out.path.horizon = t;
      break;
    }

    const double target = streams.jumps.uniform() * total;
    double acc = 0.0;
    int chosen = ndir - 1;
    for (int dir = 0; dir < ndir; ++dir) {
      acc += cond[dir];
      if (target <= acc) {
        chosen = dir;
        break;
      }
    }
    x = neighbour(x, chosen);
    tx = nb_tau[chosen];
    px = nb_pow[chosen];
    out.path.jumps.push_back({t, x});
  }
  if (out.path.jumps.empty()) {
    throw std::runtime_error("stop rule produced an empty path (no jump before the bound)");
  }
  return out;
}

}  // namespace

TimeChangedWalk simulate_time_changed_walk(const Environment& env, const DynamicsSpec& spec,
                                           const StopRule& stop, WalkStreams& streams, Site start) {
  RawWalk raw = run_walk(env, spec, stop, streams, start, Mode::TimeChanged);
  std::vector<double> breaks(raw.path.segments());
  for (std::size_t k = 0; k < breaks.size(); ++k) breaks[k] = raw.path.entry_time(k);
  TimeChangedWalk w;
  w.clock = ClockPath(std::move(breaks), std::move(raw.slopes), raw.path.horizon);
  w.path = std::move(raw.path);
  return w;
}

PathSample simulate_direct_walk(const Environment& env, const DynamicsSpec& spec,
                                const StopRule& stop, WalkStreams& streams, Site start) {
  return run_walk(env, spec, stop, streams, start, Mode::Direct).path;
}

double clock_inverse_at(const ClockPath& clock, double a) { return clock.inverse_at(a); }

RescaledClock::RescaledClock(const ClockPath& clock, double epsilon, double alpha)
    : clock_(&clock), eps_(epsilon), scale_(std::pow(epsilon, 1.0 / alpha)) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
}

double RescaledClock::operator()(double t) const {
  const double s = t / eps_;
  if (s > clock_->horizon()) throw std::out_of_range("rescaled clock evaluated beyond the horizon");
  return scale_ * clock_->value_at(s);
}

double RescaledClock::span() const { return clock_->horizon() * eps_; }

RescaledClock rescaled_clock(const ClockPath& clock, double epsilon, double alpha) {
  return RescaledClock(clock, epsilon, alpha);
}

Site direct_position(const TimeChangedWalk& walk, double t) {
  return walk.path.position_at(walk.clock.inverse_at(t));
}

}  // namespace trapkit
