#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "trapkit/paths.hpp"
#include "trapkit/rng.hpp"

namespace trapkit {

/// One pass/fail line of an experiment or acceptance check.
struct Verdict {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string note;
};

struct KsResult {
  double statistic = 0.0;
  double threshold = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
  bool pass = false;
};

/// c(level) with sup-distance threshold c / sqrt(n): 1.22, 1.36, 1.63 at
/// 10%, 5%, 1%; sqrt(-ln(level/2) / 2) otherwise.
double ks_critical_value(double level);

/// Q(x) = P[K > x] for the Kolmogorov distribution.
double kolmogorov_pvalue(double x);

/// One-sample KS against a continuous cdf. Requires n >= 20.
KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf,
                 double level = 0.05);

/// Two-sample KS: threshold c(level) sqrt((n + m) / (n m)).
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b, double level = 0.05);

struct DispersionResult {
  double index = 0.0;
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t n = 0;
  bool pass = false;
};

/// Variance-to-mean ratio with the chi-square(n-1) acceptance band for
/// Poisson counts. Requires >= 30 counts and a positive mean.
DispersionResult dispersion_test(const std::vector<double>& counts, double level = 0.05);

struct HillResult {
  double alpha = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t k = 0;
};

/// Hill estimator from the k largest order statistics with CI alpha(1 +- 1.96/sqrt(k)).
HillResult hill_alpha(const std::vector<double>& samples, std::size_t k);

struct HillDrift {
  std::vector<HillResult> estimates;
  /// Slope of alpha-hat against ln k.
  double slope = 0.0;
  /// Confidence intervals at the smallest and largest k do not overlap.
  bool drifting = false;
};

/// Hill estimates over several k; a stable plateau is expected for a true
/// power tail. Light tails make the estimate move with k and get flagged.
HillDrift hill_drift(const std::vector<double>& samples, const std::vector<std::size_t>& ks);

struct LaplaceEstimate {
  double psi = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

/// -t^{-1} ln(mean exp(-lambda v)) with a bootstrap standard error.
LaplaceEstimate empirical_laplace_exponent(const std::vector<double>& values, double lambda, double t,
                                           RngStream& rng, std::size_t resamples = 400);

/// Approximate M1 distance on [0, t] between two nondecreasing cadlag
/// functions: discrete Frechet distance (sup-norm ground metric) between
/// their completed graphs, each refined to about `refinement` points of
/// equal arclength, capped by the sup distance.
double m1_distance(const MonotonePath& f, const MonotonePath& g, double t, std::size_t refinement = 400);

/// Sample distance correlation (V-statistic form), in [0, 1].
double distance_correlation(const std::vector<double>& x, const std::vector<double>& y);

struct IndependenceResult {
  double dcor = 0.0;
  double p_value = 1.0;
  std::size_t permutations = 0;
};

/// Distance correlation with a permutation null. Requires n >= 100 and
/// non-constant marginals.
IndependenceResult independence_statistic(const std::vector<double>& x, const std::vector<double>& y,
                                          RngStream& rng, std::size_t permutations = 200);

double pearson_correlation(const std::vector<double>& x, const std::vector<double>& y);
/// Sample autocorrelation at `lag`.
double autocorrelation(const std::vector<double>& x, std::size_t lag);

/// Ordinary least-squares slope and intercept of y on x.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace trapkit
