#include <cmath>

#include "driver/common.hpp"
#include "driver/experiments.hpp"
#include "trapkit/limits.hpp"
#include "trapkit/rng.hpp"
#include "trapkit/summary.hpp"

namespace trapkit::driver {

ExperimentOutput run_quenched(StageRunner& runner) {
  const ExperimentConfig& c = runner.config();
  const double alpha = c.env.alpha;
  const std::size_t envs = c.replicas;
  const std::size_t per_env = c.option_count("walks_per_env", 20);
  const double t = c.horizons.rescaled.value_or(1.0);
  if (per_env < 2) throw ConfigError("walks_per_env must be at least 2");

  ExperimentOutput out;
  double lambda = c.option("lambda", NAN);
  if (std::isnan(lambda)) {
    // psi(lambda) t = 1, so that E[exp(-lambda H(t))] is of order e^-1.
    const std::vector<double> pool =
        greenbar_pool_stage(runner, "greenbar-pool", c.option_count("pool_size", 200), c.box_radii.front());
    double m = 0.0;
    for (double g : pool) m += std::pow(g, alpha - 1.0);
    m /= static_cast<double>(pool.size());
    lambda = std::pow(1.0 / (t * psi(1.0, alpha, m)), 1.0 / alpha);
  }
  out.summary.push_back({"lambda", NAN, NAN, lambda, t, lambda, NAN});

  const auto rows = runner.run_stage("walks", envs * per_env, [&](const TaskContext& ctx) {
    const std::size_t e = ctx.index / per_env;
    EnvParams p = c.env;
    p.seed = derive_seed(c.seed, e, 21);
    const Environment env(p);
    WalkStreams st = replica_streams(ctx.seed);
    const auto walk = simulate_time_changed_walk(env, c.dynamics, StopRule::time(t / c.epsilons.back()), st);
    json h = json::array();
    for (double eps : c.epsilons) h.push_back(rescaled_clock(walk.clock, eps, alpha)(t));
    json r;
    r["env"] = e;
    r["walk"] = ctx.index % per_env;
    r["steps"] = walk.path.steps();
    r["H"] = h;
    return std::vector<json>{r};
  });

  // Between-environment variance of the quenched means, corrected for the
  // within-environment noise, and its jackknife standard error over
  // environments.
  auto corrected_variance = [&](const std::vector<double>& means, const std::vector<double>& within) {
    return variance_of(means) - mean_of(within) / static_cast<double>(per_env);
  };
  std::vector<double> between, between_se;
  std::string trail;
  for (std::size_t i = 0; i < c.epsilons.size(); ++i) {
    std::vector<double> means(envs, 0.0), within;
    for (std::size_t e = 0; e < envs; ++e) {
      std::vector<double> v;
      for (std::size_t j = 0; j < per_env; ++j) v.push_back(std::exp(-lambda * rows[e * per_env + j]["H"][i].get<double>()));
      means[e] = mean_of(v);
      within.push_back(variance_of(v));
    }
    const double raw = variance_of(means);
    const double corrected = corrected_variance(means, within);
    std::vector<double> leave_out;
    for (std::size_t k = 0; k < envs; ++k) {
      std::vector<double> m, w;
      for (std::size_t e = 0; e < envs; ++e) {
        if (e == k) continue;
        m.push_back(means[e]);
        w.push_back(within[e]);
      }
      leave_out.push_back(corrected_variance(m, w));
    }
    const double n = static_cast<double>(envs);
    const double se = std::sqrt((n - 1.0) * (n - 1.0) / n * variance_of(leave_out));
    between.push_back(corrected);
    between_se.push_back(se);
    trail += (i ? ", " : "") + fmt(corrected) + " (se " + fmt(se) + ")";
    out.summary.push_back({"quenched_laplace_variance_raw", c.epsilons[i], NAN, lambda, t, raw, NAN});
    out.summary.push_back({"quenched_laplace_variance", c.epsilons[i], NAN, lambda, t, corrected, se});
    out.summary.push_back({"annealed_laplace", c.epsilons[i], NAN, lambda, t, mean_of(means), NAN});
  }
  // A decrease counts only when it exceeds twice the combined standard error;
  // point estimates inside the noise do not establish a trend.
  bool down = between.size() >= 2, resolved = true;
  double worst = INFINITY;
  for (std::size_t i = 1; i < between.size(); ++i) {
    if (!(between[i] < between[i - 1])) down = false;
    const double z = (between[i - 1] - between[i]) / std::hypot(between_se[i - 1], between_se[i]);
    worst = std::min(worst, z);
    if (!(z > 2.0)) resolved = false;
  }
  out.verdicts.push_back(verdict("quenched-variance-decreasing", between.size() >= 2 ? worst : NAN, 2.0, down && resolved,
                                 "between-environment variance of E_tau[exp(-lambda H(" + fmt(t) +
                                     "))], lambda = " + fmt(lambda) + ", over decreasing epsilon: " + trail +
                                     (down && !resolved ? "; decrease within noise" : "")));
  return out;
}

}  // namespace trapkit::driver
