#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "trapkit/paths.hpp"
#include "trapkit/rng.hpp"

namespace trapkit {

/// delta * u^{-1/alpha}: density alpha delta^alpha x^{-alpha-1} on [delta, inf).
double trap_depth_from_uniform(double u, double delta, double alpha);
double sample_trap_depth(double delta, double alpha, RngStream& rng);
/// 1 - (delta / x)^alpha.
double trap_depth_cdf(double x, double delta, double alpha);

/// Arrival times of a homogeneous Poisson process on [0, horizon].
std::vector<double> sample_poisson_times(double intensity, double horizon, RngStream& rng);

/// Draws of G-bar under the law with density 1 / (c G-bar) relative to the
/// environment law, c = E[1 / G-bar]. Built from a pool of untilted draws
/// (G-bar of fresh environments): a draw picks a pool entry with probability
/// proportional to its weight 1 / G-bar. The weights are unbounded, so this
/// is weighted resampling rather than rejection against a fixed envelope.
class TiltedGreenbarSampler {
 public:
  explicit TiltedGreenbarSampler(std::vector<double> pool);

  double sample(RngStream& rng) const;
  /// Pool estimate of c = E[1 / G-bar].
  double c_estimate() const { return c_; }
  /// Tilted mean of a function of G-bar: E[f(G) / G] / E[1 / G] on the pool.
  template <class F>
  double tilted_mean(F&& f) const {
    double s = 0.0, w = 0.0;
    for (double g : pool_) {
      s += f(g) / g;
      w += 1.0 / g;
    }
    return s / w;
  }
  const std::vector<double>& pool() const { return pool_; }

 private:
  std::vector<double> pool_;
  std::vector<double> cumulative_;
  double c_ = 0.0;
};

struct LimitParams {
  double alpha = 0.5;
  double delta = 1.0;
  /// Range constant c.
  double c_hat = 1.0;
  /// E[G-bar^{alpha-1}].
  double greenbar_moment = 1.0;
  std::shared_ptr<const TiltedGreenbarSampler> greenbar_sampler;

  void validate() const;
};

/// Pure-jump nondecreasing step path starting at 0.
struct StepPath {
  std::vector<double> times;
  std::vector<double> sizes;
  double horizon = 0.0;

  double value_at(double t) const;
  MonotonePath as_path() const;
};

/// H_delta on [0, horizon]: jumps at Poisson(c delta^{-alpha}) times with
/// sizes e * G-bar * tau°, the three factors independent.
StepPath sample_H_delta_path(const LimitParams& params, double horizon, RngStream& rng);

struct McValue {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// psi_delta(lambda) = c delta^{-alpha} E[1 - exp(-lambda e G-bar tau°)] by
/// Monte Carlo over independent triples.
McValue psi_delta(double lambda, const LimitParams& params, std::size_t samples, RngStream& rng);

/// Same psi_delta, computed exactly under the tilted pool law: the
/// exponential and the depth are integrated out, leaving a weighted sum over
/// the pool of psi's integrand minus its part below delta.
double psi_delta_exact(double lambda, const LimitParams& params);

/// Gamma(1 + alpha) E[G-bar^{alpha-1}] Gamma(1 - alpha) lambda^alpha.
double psi(double lambda, double alpha, double greenbar_moment);

/// Same quantity with the Levy integral int (1 - e^{-lambda u}) alpha u^{-alpha-1} du
/// evaluated by double-exponential quadrature.
double psi_by_quadrature(double lambda, double alpha, double greenbar_moment);

/// Positive strictly alpha-stable draw S with E[exp(-lambda S)] = exp(-lambda^alpha).
double positive_stable(double alpha, RngStream& rng);

/// Values of a process on an increasing time grid.
struct GridPath {
  std::vector<double> t;
  std::vector<double> v;

  /// Linear interpolation between grid points; throws outside the grid.
  double value_at(double s) const;
  /// The grid values held constant between grid points (a cadlag step path).
  MonotonePath as_step_path() const;
};

/// Stable subordinator with Laplace exponent scale * lambda^alpha, sampled on
/// `grid` (must start at or after 0 and increase). H(0) = 0 at time 0.
GridPath sample_stable_subordinator(double alpha, double scale, const std::vector<double>& grid,
                                    RngStream& rng);

/// Standard one-dimensional Brownian motion on `grid`, B(grid[0]) = 0 when grid[0] == 0.
GridPath sample_brownian(const std::vector<double>& grid, RngStream& rng);

/// B(H^{-1}(t)) with H^{-1}(t) = inf{s : H(s) > t}. Throws std::out_of_range
/// when H never exceeds t on its span.
double fractional_kinetics_eval(const GridPath& bm, const MonotonePath& subordinator, double t);

}  // namespace trapkit
