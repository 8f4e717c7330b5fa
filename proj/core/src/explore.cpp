#include "trapkit/explore.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "trapkit/rng.hpp"

namespace trapkit {

namespace {
constexpr std::uint64_t kEmpty = ~std::uint64_t{0};
}

SiteSet::SiteSet(int dim, std::size_t expected) : dim_(dim) {
  validate_dimension(dim);
  bits_ = std::min(32, 64 / dim);
  bias_ = std::int64_t{1} << (bits_ - 1);
  std::size_t cap = 16;
  while (cap * 7 < expected * 10) cap <<= 1;
  slots_.assign(cap, kEmpty);
  mask_ = cap - 1;
}

bool SiteSet::pack(const Site& s, std::uint64_t& key) const {
  // The all-ones field value is excluded so a packed key never equals kEmpty.
  const std::int64_t top = (std::int64_t{1} << bits_) - 1;
  key = 0;
  for (int i = 0; i < dim_; ++i) {
    const std::int64_t c = static_cast<std::int64_t>(s[i]) + bias_;
    if (c < 0 || c >= top) return false;
    key |= static_cast<std::uint64_t>(c) << (bits_ * i);
  }
  return true;
}

std::size_t SiteSet::slot_of(std::uint64_t key) const {
  std::size_t i = mix64(key) & mask_;
  while (slots_[i] != kEmpty && slots_[i] != key) i = (i + 1) & mask_;
  return i;
}

bool SiteSet::contains(const Site& s) const {
  std::uint64_t key;
  if (!pack(s, key)) return overflow_.count(s) != 0;
  return slots_[slot_of(key)] == key;
}

bool SiteSet::insert(const Site& s) {
  std::uint64_t key;
  if (!pack(s, key)) return overflow_.insert(s).second;
  std::size_t i = slot_of(key);
  if (slots_[i] == key) return false;
  if (10 * (size_ + 1) > 7 * slots_.size()) {
    grow();
    i = slot_of(key);
  }
  slots_[i] = key;
  ++size_;
  return true;
}

void SiteSet::grow() {
  std::vector<std::uint64_t> old = std::move(slots_);
  slots_.assign(old.size() * 2, kEmpty);
  mask_ = slots_.size() - 1;
  for (std::uint64_t k : old) {
    if (k != kEmpty) slots_[slot_of(k)] = k;
  }
}

DiscoveryState discovery_sequence(const PathSample& path, std::optional<double> until) {
  DiscoveryState st;
  st.dim = path.dim;
  const auto& offsets = neighbourhood_offsets(path.dim);
  SiteSet seen(path.dim, 4 * path.segments() + offsets.size());
  for (std::size_t k = 0; k < path.segments(); ++k) {
    const double t = path.entry_time(k);
    if (until && t > *until) break;
    const Site& x = path.site(k);
    for (const Site& off : offsets) {
      const Site y = x + off;
      if (seen.insert(y)) {
        st.sites.push_back(y);
        st.times.push_back(t);
        st.segment.push_back(k);
      }
    }
  }
  return st;
}

std::size_t RangeProcess::at(double t) const {
  auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 0;
  return counts[static_cast<std::size_t>(it - times.begin()) - 1];
}

std::size_t RangeProcess::max_jump() const {
  std::size_t best = 0, prev = 0;
  for (std::size_t c : counts) {
    best = std::max(best, c - prev);
    prev = c;
  }
  return best;
}

RangeProcess range_process(const DiscoveryState& state) {
  RangeProcess r;
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (!r.times.empty() && r.times.back() == state.times[i]) {
      ++r.counts.back();
    } else {
      r.times.push_back(state.times[i]);
      r.counts.push_back(r.counts.empty() ? 1 : r.counts.back() + 1);
    }
  }
  return r;
}

double local_time(const PathSample& path, const Site& site, double t) {
  const double end = std::min(t, path.horizon);
  double l = 0.0;
  for (std::size_t k = 0; k < path.segments(); ++k) {
    const double a = path.entry_time(k);
    if (a >= end) break;
    if (path.site(k) == site) l += std::min(path.exit_time(k), end) - a;
  }
  return l;
}

std::vector<double> local_times(const PathSample& path, const std::vector<Site>& sites) {
  std::unordered_map<Site, std::size_t, SiteHash> where;
  where.reserve(sites.size() * 2);
  for (std::size_t i = 0; i < sites.size(); ++i) where.emplace(sites[i], i);
  std::vector<double> l(sites.size(), 0.0);
  for (std::size_t k = 0; k < path.segments(); ++k) {
    auto it = where.find(path.site(k));
    if (it != where.end()) l[it->second] += path.exit_time(k) - path.entry_time(k);
  }
  return l;
}

MonotonePath local_time_path(const PathSample& path, const Site& site, double epsilon) {
  std::vector<GraphPoint> pts{{0.0, 0.0}};
  double l = 0.0;
  for (std::size_t k = 0; k < path.segments(); ++k) {
    if (!(path.site(k) == site)) continue;
    const double a = path.entry_time(k);
    const double b = path.exit_time(k);
    if (epsilon * a > pts.back().t) pts.push_back({epsilon * a, l});
    l += b - a;
    pts.push_back({epsilon * b, l});
  }
  if (epsilon * path.horizon > pts.back().t) pts.push_back({epsilon * path.horizon, l});
  return MonotonePath(std::move(pts));
}

std::vector<DeepTrapRecord> collect_deep_traps(const PathSample& path, const Environment& env,
                                               const DeepTrapOptions& opts) {
  return collect_deep_traps(path, discovery_sequence(path, opts.discovery_cutoff), env, opts);
}

std::vector<DeepTrapRecord> collect_deep_traps(const PathSample& path, const DiscoveryState& state,
                                               const Environment& env, const DeepTrapOptions& opts) {
  if (!(opts.epsilon > 0.0) || !(opts.delta > 0.0)) {
    throw std::invalid_argument("deep-trap extraction needs epsilon, delta > 0");
  }
  const double scale = std::pow(opts.epsilon, 1.0 / env.params().alpha);
  std::vector<DeepTrapRecord> out;
  std::vector<Site> sites;
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (opts.discovery_cutoff && state.times[i] > *opts.discovery_cutoff) break;
    const double tau = env.tau_at(state.sites[i]);
    if (scale * tau < opts.delta) continue;
    DeepTrapRecord r;
    r.n = out.size() + 1;
    r.site = state.sites[i];
    r.discovery_time = state.times[i];
    r.depth = tau;
    r.scaled_depth = scale * tau;
    out.push_back(r);
    sites.push_back(r.site);
  }
  const std::vector<double> l = local_times(path, sites);
  for (std::size_t i = 0; i < out.size(); ++i) {
    DeepTrapRecord& r = out[i];
    r.local_time = l[i];
    r.visited = l[i] > 0.0;
    if (opts.green_box > 0 && (r.visited || opts.with_green_bar)) {
      const EnvWindow w = env.window(r.site, opts.green_box + 1, false);
      if (r.visited) {
        r.green_at_trap = solve_green_box(w, opts.green_box, opts.spec, opts.solver).value;
        r.excess = r.local_time / *r.green_at_trap;
      }
      if (opts.with_green_bar) r.green_bar = green_bar(w, opts.green_box, opts.spec, opts.solver).value;
    }
    if (opts.record_window_radius > 0) r.env_window = env.window(r.site, opts.record_window_radius, true);
  }
  return out;
}

double restricted_additive_functional(const PathSample& path, const Environment& env,
                                      const AdditiveWeight& weight, double epsilon, double delta,
                                      double t) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  const double end = t / epsilon;
  if (end > path.horizon) throw std::out_of_range("additive functional evaluated beyond the horizon");
  if (weight.kind == AdditiveWeight::Kind::TestFunction && !weight.h) {
    throw std::invalid_argument("test-function weight without a function");
  }
  const double scale = std::pow(epsilon, 1.0 / env.params().alpha);
  double sum = 0.0;
  for (std::size_t k = 0; k < path.segments(); ++k) {
    const double a = path.entry_time(k);
    if (a >= end) break;
    const double tau = env.tau_at(path.site(k));
    if (scale * tau < delta) continue;
    const double dur = std::min(path.exit_time(k), end) - a;
    const double w = weight.kind == AdditiveWeight::Kind::Depth ? scale * tau : weight.h(env, path.site(k));
    sum += w * dur;
  }
  return sum;
}

MonotonePath restricted_clock_path(const PathSample& path, const Environment& env, double epsilon,
                                   double delta) {
  const double scale = std::pow(epsilon, 1.0 / env.params().alpha);
  std::vector<GraphPoint> pts{{0.0, 0.0}};
  double h = 0.0;
  for (std::size_t k = 0; k < path.segments(); ++k) {
    const double tau = env.tau_at(path.site(k));
    if (scale * tau < delta) continue;
    const double a = path.entry_time(k);
    const double b = path.exit_time(k);
    if (epsilon * a > pts.back().t) pts.push_back({epsilon * a, h});
    h += scale * tau * (b - a);
    pts.push_back({epsilon * b, h});
  }
  if (epsilon * path.horizon > pts.back().t) pts.push_back({epsilon * path.horizon, h});
  return MonotonePath(std::move(pts));
}

MonotonePath rescaled_clock_path(const ClockPath& clock, double epsilon, double alpha) {
  const double scale = std::pow(epsilon, 1.0 / alpha);
  const auto& b = clock.breakpoints();
  const auto& c = clock.cumulative();
  std::vector<GraphPoint> pts;
  pts.reserve(b.size() + 1);
  for (std::size_t k = 0; k < b.size(); ++k) pts.push_back({epsilon * b[k], scale * c[k]});
  pts.push_back({epsilon * clock.horizon(), scale * clock.total()});
  return MonotonePath(std::move(pts));
}

MonotonePath step_approximation(const DeepTrapRecord& record, double epsilon, double horizon) {
  return MonotonePath::step(epsilon * record.discovery_time, record.local_time, horizon);
}

}  // namespace trapkit
