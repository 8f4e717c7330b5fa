#include <algorithm>
#include <cmath>

#include "driver/common.hpp"
#include "driver/experiments.hpp"
#include "trapkit/limits.hpp"
#include "trapkit/rng.hpp"
#include "trapkit/stats.hpp"

namespace trapkit::driver {

namespace {

std::vector<double> uniform_grid(double step, std::size_t points) {
  std::vector<double> g(points + 1);
  for (std::size_t k = 0; k <= points; ++k) g[k] = step * static_cast<double>(k);
  return g;
}

// Stable subordinator on a uniform grid, extended block by block with
// independent increments until it exceeds `level`.
GridPath subordinator_past(double alpha, double scale, double step, double level, RngStream& rng) {
  constexpr std::size_t kBlock = 1000;
  const std::vector<double> block = uniform_grid(step, kBlock);
  GridPath h = sample_stable_subordinator(alpha, scale, block, rng);
  while (!(h.v.back() > level)) {
    const GridPath more = sample_stable_subordinator(alpha, scale, block, rng);
    const double t0 = h.t.back(), v0 = h.v.back();
    for (std::size_t k = 1; k < more.t.size(); ++k) {
      h.t.push_back(t0 + more.t[k]);
      h.v.push_back(v0 + more.v[k]);
    }
  }
  return h;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k) {
    g[k] = n == 1 ? hi : lo * std::pow(hi / lo, static_cast<double>(k) / static_cast<double>(n - 1));
  }
  return g;
}

LinearFit loglog(const std::vector<double>& t, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < t.size(); ++k) {
    lx.push_back(std::log(t[k]));
    ly.push_back(std::log(y[k]));
  }
  return linear_fit(lx, ly);
}

}  // namespace

ExperimentOutput run_fk(StageRunner& runner) {
  const ExperimentConfig& c = runner.config();
  const double alpha = c.env.alpha;
  const std::size_t draws = c.option_count("stable_draws", 10000);
  const double scale = c.option("scale", 1.0);
  const std::size_t ref_paths = c.option_count("reference_paths", 4000);
  const double step = c.option("grid_step", 0.001);
  const std::vector<double> times =
      log_grid(c.option("t_min", 0.01), c.option("t_max", 1.0), c.option_count("t_points", 9));
  const double t_max = times.back();
  constexpr std::size_t kChunk = 1000;

  ExperimentOutput out;

  // Stable subordinator: H(1) on {0, 1}, 2^{-1/alpha} H(2) on {0, 2}, and
  // H(1) summed over quarter steps, all from independent draws.
  const auto stable_rows = runner.run_stage("stable", (draws + kChunk - 1) / kChunk, [&](const TaskContext& ctx) {
    const std::size_t m = std::min(kChunk, draws - ctx.index * kChunk);
    RngStream rng(ctx.seed);
    json one = json::array(), two = json::array(), fine = json::array();
    for (std::size_t i = 0; i < m; ++i) {
      one.push_back(sample_stable_subordinator(alpha, scale, {0.0, 1.0}, rng).v.back());
      two.push_back(std::pow(2.0, -1.0 / alpha) * sample_stable_subordinator(alpha, scale, {0.0, 2.0}, rng).v.back());
      fine.push_back(sample_stable_subordinator(alpha, scale, {0.0, 0.25, 0.5, 0.75, 1.0}, rng).v.back());
    }
    json r;
    r["chunk"] = ctx.index;
    r["H1"] = one;
    r["H2_rescaled"] = two;
    r["H1_quarters"] = fine;
    return std::vector<json>{r};
  });
  std::vector<double> h1, h2, hq;
  for (const auto& r : stable_rows) {
    for (const auto& v : r["H1"]) h1.push_back(v.get<double>());
    for (const auto& v : r["H2_rescaled"]) h2.push_back(v.get<double>());
    for (const auto& v : r["H1_quarters"]) hq.push_back(v.get<double>());
  }
  {
    const KsResult ks = ks_two_sample(h1, h2);
    out.verdicts.push_back(verdict("stable-self-similarity", ks.statistic, ks.threshold, ks.pass,
                                   "H(1) vs 2^(-1/alpha) H(2), p = " + fmt(ks.p_value)));
    const KsResult kq = ks_two_sample(h1, hq);
    out.verdicts.push_back(verdict("stable-increments", kq.statistic, kq.threshold, kq.pass,
                                   "H(1) vs sum of four quarter-step increments, p = " + fmt(kq.p_value)));
    RngStream boot(derive_seed(c.seed, 0, 17));
    for (double l : c.lambdas) {
      const LaplaceEstimate e = empirical_laplace_exponent(h1, l, 1.0, boot);
      const double target = scale * std::pow(l, alpha);
      const double z = std::abs(e.psi - target) / e.std_error;
      out.verdicts.push_back(verdict("stable-laplace lambda=" + fmt(l), z, 3.0, z <= 3.0,
                                     "empirical " + fmt(e.psi) + " vs " + fmt(target)));
    }
  }

  // Reference fractional kinetics B(H^{-1}(t)).
  const auto ref_rows = runner.run_stage("reference", (ref_paths + kChunk - 1) / kChunk, [&](const TaskContext& ctx) {
    const std::size_t m = std::min(kChunk, ref_paths - ctx.index * kChunk);
    RngStream rng(ctx.seed);
    std::vector<double> sq(times.size(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const GridPath h = subordinator_past(alpha, scale, step, t_max, rng);
      const GridPath b = sample_brownian(h.t, rng);
      const MonotonePath hp = h.as_step_path();
      for (std::size_t k = 0; k < times.size(); ++k) {
        const double x = fractional_kinetics_eval(b, hp, times[k]);
        sq[k] += x * x;
      }
    }
    json r;
    r["chunk"] = ctx.index;
    r["paths"] = m;
    r["sum_sq"] = sq;
    return std::vector<json>{r};
  });
  {
    std::vector<double> msd(times.size(), 0.0);
    double count = 0.0;
    for (const auto& r : ref_rows) {
      count += r["paths"].get<double>();
      for (std::size_t k = 0; k < times.size(); ++k) msd[k] += r["sum_sq"][k].get<double>();
    }
    for (std::size_t k = 0; k < times.size(); ++k) {
      msd[k] /= count;
      out.summary.push_back({"fk_reference_msd", NAN, NAN, NAN, times[k], msd[k], NAN});
    }
    const LinearFit fit = loglog(times, msd);
    const double rel = std::abs(fit.slope - alpha) / alpha;
    out.verdicts.push_back(verdict("fk-reference-msd-slope", rel, 0.1, rel <= 0.1,
                                   "log-log slope " + fmt(fit.slope) + " vs alpha = " + fmt(alpha)));
  }

  // X^(eps)(t) = sqrt(eps) X(eps^{-1/alpha} t): one walk per replica, run
  // until the clock passes the largest time needed.
  const double clock_limit = std::pow(c.epsilons.back(), -1.0 / alpha) * t_max;
  const auto walk_rows = runner.run_stage("walks", c.replicas, [&](const TaskContext& ctx) {
    const Environment env = replica_env(c, ctx.seed);
    WalkStreams st = replica_streams(ctx.seed);
    const auto walk = simulate_time_changed_walk(env, c.dynamics, StopRule::clock(clock_limit), st);
    json sq = json::array();
    for (double eps : c.epsilons) {
      json row = json::array();
      for (double t : times) {
        const Site x = direct_position(walk, std::pow(eps, -1.0 / alpha) * t);
        double s = 0.0;
        for (int i = 0; i < env.dim(); ++i) s += static_cast<double>(x[i]) * static_cast<double>(x[i]);
        row.push_back(eps * s);
      }
      sq.push_back(row);
    }
    json r;
    r["replica"] = ctx.index;
    r["steps"] = walk.path.steps();
    r["sq"] = sq;
    return std::vector<json>{r};
  });
  for (std::size_t i = 0; i < c.epsilons.size(); ++i) {
    std::vector<double> msd(times.size(), 0.0);
    for (const auto& r : walk_rows) {
      for (std::size_t k = 0; k < times.size(); ++k) msd[k] += r["sq"][i][k].get<double>();
    }
    bool positive = true;
    for (std::size_t k = 0; k < times.size(); ++k) {
      msd[k] /= static_cast<double>(walk_rows.size());
      positive = positive && msd[k] > 0.0;
      out.summary.push_back({"fk_walk_msd", c.epsilons[i], NAN, NAN, times[k], msd[k], NAN});
    }
    if (!positive) {
      out.verdicts.push_back(verdict("fk-walk-msd-slope " + grid_tag(c.epsilons[i]), NAN, 0.15, false,
                                     "zero mean squared displacement at some t"));
      continue;
    }
    const LinearFit fit = loglog(times, msd);
    out.summary.push_back({"fk_walk_msd_slope", c.epsilons[i], NAN, NAN, NAN, fit.slope, fit.slope_se});
    if (i + 1 == c.epsilons.size()) {
      const double dev = std::abs(fit.slope - alpha);
      out.verdicts.push_back(verdict("fk-walk-msd-slope " + grid_tag(c.epsilons[i]), dev, 0.15, dev <= 0.15,
                                     "log-log slope " + fmt(fit.slope) + " vs alpha = " + fmt(alpha)));
    }
  }
  return out;
}

}  // namespace trapkit::driver
