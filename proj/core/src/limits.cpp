#include "trapkit/limits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace trapkit {

double trap_depth_from_uniform(double u, double delta, double alpha) {
  return delta * std::pow(u, -1.0 / alpha);
}

double sample_trap_depth(double delta, double alpha, RngStream& rng) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  return trap_depth_from_uniform(rng.uniform(), delta, alpha);
}

double trap_depth_cdf(double x, double delta, double alpha) {
  if (x <= delta) return 0.0;
  return 1.0 - std::pow(delta / x, alpha);
}

std::vector<double> sample_poisson_times(double intensity, double horizon, RngStream& rng) {
  if (!(intensity >= 0.0)) throw std::invalid_argument("intensity must be >= 0");
  std::vector<double> times;
  if (intensity == 0.0) return times;
  double t = 0.0;
  for (;;) {
    t += rng.exponential() / intensity;
    if (t > horizon) break;
    times.push_back(t);
  }
  return times;
}

TiltedGreenbarSampler::TiltedGreenbarSampler(std::vector<double> pool) : pool_(std::move(pool)) {
  if (pool_.empty()) throw std::invalid_argument("tilted sampler needs a non-empty pool");
  cumulative_.reserve(pool_.size());
  double s = 0.0;
  for (double g : pool_) {
    if (!(g > 0.0) || !std::isfinite(g)) throw std::invalid_argument("G-bar pool values must be positive");
    s += 1.0 / g;
    cumulative_.push_back(s);
  }
  c_ = s / static_cast<double>(pool_.size());
}

double TiltedGreenbarSampler::sample(RngStream& rng) const {
  const double target = rng.uniform() * cumulative_.back();
  auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), target);
  if (it == cumulative_.end()) --it;
  return pool_[static_cast<std::size_t>(it - cumulative_.begin())];
}

void LimitParams::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  if (!(c_hat > 0.0)) throw std::invalid_argument("c_hat must be positive");
}

double StepPath::value_at(double t) const {
  double v = 0.0;
  for (std::size_t k = 0; k < times.size() && times[k] <= t; ++k) v += sizes[k];
  return v;
}

MonotonePath StepPath::as_path() const {
  std::vector<GraphPoint> pts{{0.0, 0.0}};
  double v = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    pts.push_back({times[k], v});
    v += sizes[k];
    pts.push_back({times[k], v});
  }
  pts.push_back({horizon, v});
  return MonotonePath(std::move(pts));
}

namespace {

const TiltedGreenbarSampler& sampler_of(const LimitParams& p) {
  if (!p.greenbar_sampler) throw std::invalid_argument("limit parameters carry no G-bar sampler");
  return *p.greenbar_sampler;
}

}  // namespace

StepPath sample_H_delta_path(const LimitParams& params, double horizon, RngStream& rng) {
  params.validate();
  const auto& gs = sampler_of(params);
  StepPath p;
  p.horizon = horizon;
  p.times = sample_poisson_times(params.c_hat * std::pow(params.delta, -params.alpha), horizon, rng);
  p.sizes.reserve(p.times.size());
  for (std::size_t k = 0; k < p.times.size(); ++k) {
    const double e = rng.exponential();
    const double g = gs.sample(rng);
    const double tau = sample_trap_depth(params.delta, params.alpha, rng);
    p.sizes.push_back(e * g * tau);
  }
  return p;
}

McValue psi_delta(double lambda, const LimitParams& params, std::size_t samples, RngStream& rng) {
  params.validate();
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  if (samples < 2) throw std::invalid_argument("psi_delta needs at least 2 samples");
  McValue out;
  out.samples = samples;
  if (lambda == 0.0) return out;
  const auto& gs = sampler_of(params);
  double s = 0.0, s2 = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    const double e = rng.exponential();
    const double g = gs.sample(rng);
    const double tau = sample_trap_depth(params.delta, params.alpha, rng);
    const double x = -std::expm1(-lambda * e * g * tau);
    s += x;
    s2 += x * x;
  }
  const double n = static_cast<double>(samples);
  const double m = s / n;
  const double var = std::max(0.0, (s2 - n * m * m) / (n - 1.0));
  const double pref = params.c_hat * std::pow(params.delta, -params.alpha);
  out.value = pref * m;
  out.std_error = pref * std::sqrt(var / n);
  return out;
}

double psi_delta_exact(double lambda, const LimitParams& params) {
  params.validate();
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  if (lambda == 0.0) return 0.0;
  const auto& gs = sampler_of(params);
  const double a = params.alpha;
  const double full = std::tgamma(1.0 + a) * std::tgamma(1.0 - a);
  boost::math::quadrature::tanh_sinh<double> integrator;
  // With k = lambda G delta, E[1 - exp(-k e s)] over e ~ Exp(1) and
  // s ~ Pareto(alpha) on [1, inf) is full k^a - a k int_0^1 s^-a / (1 + k s) ds.
  auto inner = [&](double g) {
    const double k = lambda * g * params.delta;
    const double below =
        integrator.integrate([&](double s) { return std::pow(s, -a) / (1.0 + k * s); }, 0.0, 1.0, 1e-13);
    return full * std::pow(k, a) - a * k * below;
  };
  return params.c_hat * std::pow(params.delta, -a) * gs.tilted_mean(inner);
}

double psi(double lambda, double alpha, double greenbar_moment) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  if (lambda == 0.0) return 0.0;
  return std::tgamma(1.0 + alpha) * greenbar_moment * std::tgamma(1.0 - alpha) * std::pow(lambda, alpha);
}

double psi_by_quadrature(double lambda, double alpha, double greenbar_moment) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  if (lambda == 0.0) return 0.0;
  boost::math::quadrature::exp_sinh<double> integrator;
  auto f = [&](double u) { return -std::expm1(-lambda * u) * alpha * std::pow(u, -alpha - 1.0); };
  const double levy = integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity(), 1e-13);
  return std::tgamma(1.0 + alpha) * greenbar_moment * levy;
}

double positive_stable(double alpha, RngStream& rng) {
  // Kanter's representation of the one-sided stable law.
  double u;
  do {
    u = rng.uniform();
  } while (u >= 1.0);
  const double U = std::numbers::pi * u;
  const double W = rng.exponential();
  const double a = std::sin(alpha * U) / std::pow(std::sin(U), 1.0 / alpha);
  const double b = std::pow(std::sin((1.0 - alpha) * U) / W, (1.0 - alpha) / alpha);
  return a * b;
}

double GridPath::value_at(double s) const {
  if (t.empty() || s < t.front() || s > t.back()) throw std::out_of_range("grid path evaluated off its grid");
  auto it = std::upper_bound(t.begin(), t.end(), s);
  if (it == t.end()) return v.back();
  const std::size_t j = static_cast<std::size_t>(it - t.begin());
  if (j == 0) return v.front();
  const double w = (s - t[j - 1]) / (t[j] - t[j - 1]);
  return v[j - 1] + w * (v[j] - v[j - 1]);
}

MonotonePath GridPath::as_step_path() const {
  std::vector<GraphPoint> pts;
  pts.reserve(2 * t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (k > 0) pts.push_back({t[k], v[k - 1]});
    pts.push_back({t[k], v[k]});
  }
  return MonotonePath(std::move(pts));
}

namespace {

std::vector<double> grid_from_zero(const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("empty time grid");
  if (grid.front() < 0.0) throw std::invalid_argument("time grid must start at or after 0");
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) throw std::invalid_argument("time grid must be increasing");
  }
  std::vector<double> g;
  g.reserve(grid.size() + 1);
  if (grid.front() > 0.0) g.push_back(0.0);
  g.insert(g.end(), grid.begin(), grid.end());
  return g;
}

}  // namespace

GridPath sample_stable_subordinator(double alpha, double scale, const std::vector<double>& grid,
                                    RngStream& rng) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (!(scale > 0.0)) throw std::invalid_argument("scale must be positive");
  GridPath p;
  p.t = grid_from_zero(grid);
  p.v.assign(p.t.size(), 0.0);
  for (std::size_t k = 1; k < p.t.size(); ++k) {
    const double dt = p.t[k] - p.t[k - 1];
    p.v[k] = p.v[k - 1] + std::pow(scale * dt, 1.0 / alpha) * positive_stable(alpha, rng);
  }
  return p;
}

GridPath sample_brownian(const std::vector<double>& grid, RngStream& rng) {
  GridPath p;
  p.t = grid_from_zero(grid);
  p.v.assign(p.t.size(), 0.0);
  for (std::size_t k = 1; k < p.t.size(); ++k) {
    p.v[k] = p.v[k - 1] + std::sqrt(p.t[k] - p.t[k - 1]) * rng.normal();
  }
  return p;
}

double fractional_kinetics_eval(const GridPath& bm, const MonotonePath& subordinator, double t) {
  return bm.value_at(subordinator.inverse(t));
}

}  // namespace trapkit
