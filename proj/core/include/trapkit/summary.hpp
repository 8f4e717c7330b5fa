#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "trapkit/rng.hpp"

namespace trapkit {

/// Exactly rounded floating-point sum (Shewchuk's non-overlapping partials).
/// The result depends only on the multiset of added values, so merges are
/// associative and commutative bit for bit.
class ExactSum {
 public:
  void add(double x);
  void merge(const ExactSum& other);
  double value() const;

 private:
  std::vector<double> partials_;
};

/// Count, exact sums and optionally the full sample.
class EmpiricalSummary {
 public:
  explicit EmpiricalSummary(bool keep_samples = true) : keep_(keep_samples) {}

  void add(double x);
  void merge(const EmpiricalSummary& other);

  std::size_t count() const { return n_; }
  double sum() const { return sum_.value(); }
  double mean() const;
  /// Unbiased sample variance.
  double variance() const;
  double std_error() const;
  double min() const { return min_; }
  double max() const { return max_; }

  bool keeps_samples() const { return keep_; }
  const std::vector<double>& samples() const { return samples_; }
  /// Linear-interpolated empirical quantile; needs the stored sample.
  double quantile(double p) const;

 private:
  bool keep_;
  std::size_t n_ = 0;
  ExactSum sum_;
  ExactSum sumsq_;
  double min_ = 0.0;
  double max_ = 0.0;
  std::vector<double> samples_;
};

struct BootstrapConfig {
  std::size_t resamples = 400;
  double level = 0.95;
};

/// Point estimate on the original data plus the bootstrap standard
/// deviation and percentile interval.
struct BootstrapResult {
  double estimate = 0.0;
  double std_error = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t resamples = 0;
};

/// Generic nonparametric bootstrap over row indices 0..n-1. The statistic
/// receives a resampled index list (the identity list for the estimate).
BootstrapResult bootstrap_indices(std::size_t n,
                                  const std::function<double(const std::vector<std::size_t>&)>& stat,
                                  RngStream& rng, const BootstrapConfig& cfg = {});

BootstrapResult bootstrap_mean(const std::vector<double>& data, RngStream& rng,
                               const BootstrapConfig& cfg = {});

double mean_of(const std::vector<double>& v);
double variance_of(const std::vector<double>& v);

}  // namespace trapkit
