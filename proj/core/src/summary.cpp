#include "trapkit/summary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace trapkit {

void ExactSum::add(double x) {
  std::size_t i = 0;
  for (double y : partials_) {
    if (std::abs(x) < std::abs(y)) std::swap(x, y);
    const double hi = x + y;
    const double lo = y - (hi - x);
    if (lo != 0.0) partials_[i++] = lo;
    x = hi;
  }
  partials_.resize(i);
  partials_.push_back(x);
}

void ExactSum::merge(const ExactSum& other) {
  for (double p : other.partials_) add(p);
}

double ExactSum::value() const {
  // Round-half-even correction of the top partials, as in Python's fsum.
  if (partials_.empty()) return 0.0;
  std::size_t n = partials_.size();
  double hi = partials_[--n];
  double lo = 0.0;
  while (n > 0) {
    const double x = hi;
    const double y = partials_[--n];
    hi = x + y;
    const double yr = hi - x;
    lo = y - yr;
    if (lo != 0.0) break;
  }
  if (n > 0 && ((lo < 0.0 && partials_[n - 1] < 0.0) || (lo > 0.0 && partials_[n - 1] > 0.0))) {
    const double y = lo * 2.0;
    const double x = hi + y;
    const double yr = x - hi;
    if (y == yr) hi = x;
  }
  return hi;
}

void EmpiricalSummary::add(double x) {
  if (n_ == 0) {
    min_ = max_ = x;
  } else {
    min_ = std::min(min_, x);
    max_ = std::max(max_, x);
  }
  ++n_;
  sum_.add(x);
  sumsq_.add(x * x);
  if (keep_) samples_.push_back(x);
}

void EmpiricalSummary::merge(const EmpiricalSummary& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    min_ = other.min_;
    max_ = other.max_;
  } else {
    min_ = std::min(min_, other.min_);
    max_ = std::max(max_, other.max_);
  }
  n_ += other.n_;
  sum_.merge(other.sum_);
  sumsq_.merge(other.sumsq_);
  if (keep_) {
    if (!other.keep_) throw std::logic_error("cannot merge a summary without samples into one with");
    samples_.insert(samples_.end(), other.samples_.begin(), other.samples_.end());
  }
}

double EmpiricalSummary::mean() const {
  if (n_ == 0) throw std::logic_error("mean of empty summary");
  return sum() / static_cast<double>(n_);
}

double EmpiricalSummary::variance() const {
  if (n_ < 2) return 0.0;
  if (keep_) return variance_of(samples_);
  const double n = static_cast<double>(n_);
  const double s = sum();
  return std::max(0.0, (sumsq_.value() - s * s / n) / (n - 1.0));
}

double EmpiricalSummary::std_error() const {
  if (n_ == 0) return 0.0;
  return std::sqrt(variance() / static_cast<double>(n_));
}

double EmpiricalSummary::quantile(double p) const {
  if (!keep_ || samples_.empty()) throw std::logic_error("quantile needs stored samples");
  std::vector<double> v = samples_;
  std::sort(v.begin(), v.end());
  const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("mean of empty vector");
  ExactSum s;
  for (double x : v) s.add(x);
  return s.value() / static_cast<double>(v.size());
}

double variance_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  ExactSum s;
  for (double x : v) s.add((x - m) * (x - m));
  return s.value() / static_cast<double>(v.size() - 1);
}

BootstrapResult bootstrap_indices(std::size_t n,
                                  const std::function<double(const std::vector<std::size_t>&)>& stat,
                                  RngStream& rng, const BootstrapConfig& cfg) {
  if (n == 0) throw std::invalid_argument("bootstrap of empty data");
  if (cfg.resamples < 2) throw std::invalid_argument("bootstrap needs at least 2 resamples");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  BootstrapResult out;
  out.estimate = stat(idx);
  out.resamples = cfg.resamples;
  std::vector<double> reps(cfg.resamples);
  for (auto& r : reps) {
    for (auto& i : idx) i = rng.index(n);
    r = stat(idx);
  }
  out.std_error = std::sqrt(variance_of(reps));
  std::sort(reps.begin(), reps.end());
  const double tail = 0.5 * (1.0 - cfg.level);
  auto pick = [&](double p) {
    const auto k = static_cast<std::size_t>(std::floor(p * static_cast<double>(reps.size() - 1) + 0.5));
    return reps[std::min(k, reps.size() - 1)];
  };
  out.lower = pick(tail);
  out.upper = pick(1.0 - tail);
  return out;
}

BootstrapResult bootstrap_mean(const std::vector<double>& data, RngStream& rng,
                               const BootstrapConfig& cfg) {
  return bootstrap_indices(
      data.size(),
      [&](const std::vector<std::size_t>& idx) {
        double s = 0.0;
        for (auto i : idx) s += data[i];
        return s / static_cast<double>(idx.size());
      },
      rng, cfg);
}

}  // namespace trapkit
