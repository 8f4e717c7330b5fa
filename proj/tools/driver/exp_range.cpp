#include <algorithm>
#include <cmath>

#include "driver/common.hpp"
#include "driver/experiments.hpp"
#include "trapkit/explore.hpp"
#include "trapkit/stats.hpp"

namespace trapkit::driver {

namespace {
constexpr int kMaxLag = 5;
}

ExperimentOutput run_range(StageRunner& runner) {
  const ExperimentConfig& c = runner.config();
  const std::size_t steps = c.horizons.steps.value_or(10000);
  const double t1 = c.horizons.time.value_or(64.0);
  const std::size_t bins = c.option_count("histogram_bins", 16384);
  const bool pareto = !c.env.table.has_value();
  const int d = c.env.dim;

  std::vector<double> grid;
  for (double t = 1.0; t <= 2.0 * t1 + 1e-12; t *= 2.0) grid.push_back(t);
  if (grid.back() != 2.0 * t1) grid.push_back(2.0 * t1);
  if (std::find(grid.begin(), grid.end(), t1) == grid.end()) {
    grid.push_back(t1);
    std::sort(grid.begin(), grid.end());
  }

  const auto rows = runner.run_stage("walks", c.replicas, [&](const TaskContext& ctx) {
    const Environment env = replica_env(c, ctx.seed);
    WalkStreams st = replica_streams(ctx.seed);
    const auto walk = simulate_time_changed_walk(env, c.dynamics, StopRule::steps(steps), st);
    const DiscoveryState ds = discovery_sequence(walk.path);

    std::vector<std::size_t> hist(bins, 0);
    std::vector<int> deep(ds.size());
    std::size_t far = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const double tau = env.tau_at(ds.sites[i]);
      const double v = pareto ? std::pow(tau, -c.env.alpha) : env.uniform_at(ds.sites[i]);
      hist[std::min(bins - 1, static_cast<std::size_t>(v * static_cast<double>(bins)))]++;
      deep[i] = tau >= 2.0 ? 1 : 0;
      const Site& at = walk.path.site(ds.segment[i]);
      if (!(ds.sites[i] == at) && !are_neighbours(ds.sites[i], at, d)) ++far;
    }
    std::size_t ones = 0;
    std::vector<std::size_t> lag_products(kMaxLag, 0);
    for (std::size_t i = 0; i < deep.size(); ++i) {
      ones += deep[i];
      for (int k = 1; k <= kMaxLag; ++k) {
        if (i + k < deep.size()) lag_products[k - 1] += deep[i] * deep[i + k];
      }
    }
    const RangeProcess r = range_process(ds);
    std::vector<std::size_t> r_grid;
    for (double t : grid) r_grid.push_back(t <= walk.path.horizon ? r.at(t) : 0);

    json row;
    row["replica"] = ctx.index;
    row["steps"] = walk.path.steps();
    row["horizon"] = walk.path.horizon;
    row["discovered"] = ds.size();
    row["far_from_path"] = far;
    row["max_jump"] = r.max_jump();
    row["r_grid"] = r_grid;
    row["deep2"] = ones;
    row["lag_products"] = lag_products;
    row["histogram"] = hist;
    return std::vector<json>{row};
  });

  ExperimentOutput out;
  const std::size_t jump_cap = static_cast<std::size_t>(2 * d + 1);
  double total = 0.0, ones = 0.0;
  std::vector<double> hist(bins, 0.0), lag(kMaxLag, 0.0), lag_pairs(kMaxLag, 0.0);
  std::size_t far = 0, big_jumps = 0, short_walks = 0;
  std::vector<double> r2(grid.size(), 0.0), ratio1, ratio2;
  const auto i1 = static_cast<std::size_t>(std::find(grid.begin(), grid.end(), t1) - grid.begin());
  const auto i2 = grid.size() - 1;
  for (const auto& row : rows) {
    const double n = row["discovered"].get<double>();
    total += n;
    ones += row["deep2"].get<double>();
    for (std::size_t b = 0; b < bins; ++b) hist[b] += row["histogram"][b].get<double>();
    for (int k = 0; k < kMaxLag; ++k) {
      lag[k] += row["lag_products"][k].get<double>();
      lag_pairs[k] += std::max(0.0, n - (k + 1));
    }
    far += row["far_from_path"].get<std::size_t>();
    if (row["max_jump"].get<std::size_t>() > jump_cap) ++big_jumps;
    if (row["horizon"].get<double>() < grid.back()) {
      ++short_walks;
      continue;
    }
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double rv = row["r_grid"][j].get<double>();
      r2[j] += rv * rv;
    }
    ratio1.push_back(row["r_grid"][i1].get<double>() / t1);
    ratio2.push_back(row["r_grid"][i2].get<double>() / grid.back());
  }

  // Pooled KS from the histogram: the empirical cdf of v = tau^{-alpha} is
  // evaluated at bin edges (resolution 1 / bins).
  if (pareto) {
    double cum = 0.0, dmax = 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
      cum += hist[b];
      dmax = std::max(dmax, std::abs(cum / total - static_cast<double>(b + 1) / static_cast<double>(bins)));
    }
    const double thr = ks_critical_value(0.05) / std::sqrt(total);
    out.verdicts.push_back(verdict("exploration-depths-ks", dmax, thr, dmax <= thr,
                                   "pooled N = " + fmt(total) + ", p = " +
                                       fmt(kolmogorov_pvalue(std::sqrt(total) * dmax))));
  } else {
    out.verdicts.push_back(verdict("exploration-depths-ks", NAN, NAN, true, "skipped: environment law is not Pareto"));
  }

  const double p = ones / total;
  double worst = 0.0;
  for (int k = 0; k < kMaxLag; ++k) {
    const double rho = (lag[k] / lag_pairs[k] - p * p) / (p * (1.0 - p));
    worst = std::max(worst, std::abs(rho));
    out.summary.push_back({"autocorrelation_deep2", NAN, NAN, NAN, static_cast<double>(k + 1), rho, NAN});
  }
  const double acf_thr = 4.0 / std::sqrt(total);
  out.verdicts.push_back(verdict("exploration-autocorrelation", worst, acf_thr, worst <= acf_thr,
                                 "max |rho_k|, k = 1..5, of 1{tau >= 2}"));
  out.verdicts.push_back(verdict("discovered-within-distance-1", static_cast<double>(far), 0.0, far == 0));
  out.verdicts.push_back(verdict("range-jumps-bounded", static_cast<double>(big_jumps), 0.0, big_jumps == 0,
                                 "r jumps <= 2d + 1"));

  if (ratio1.size() < 2) {
    out.verdicts.push_back(verdict("range-slope-stable", NAN, 0.05, false,
                                   "walks too short for the horizon 2t = " + fmt(grid.back())));
    return out;
  }
  const Estimate s1 = mean_estimate(ratio1), s2 = mean_estimate(ratio2);
  const double rel = std::abs(s1.value - s2.value) / s2.value;
  out.verdicts.push_back(verdict("range-slope-stable", rel, 0.05, rel <= 0.05,
                                 "r(t)/t = " + fmt(s1.value) + " at t = " + fmt(t1) + ", " + fmt(s2.value) +
                                     " at 2t" + (short_walks ? "; " + std::to_string(short_walks) + " short walks dropped" : "")));
  out.summary.push_back({"range_slope", NAN, NAN, NAN, t1, s1.value, s1.std_error});
  out.summary.push_back({"range_slope", NAN, NAN, NAN, grid.back(), s2.value, s2.std_error});

  std::vector<double> lx, ly;
  const double m = static_cast<double>(ratio1.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    out.summary.push_back({"range_second_moment", NAN, NAN, NAN, grid[j], r2[j] / m, NAN});
    if (grid[j] >= 8.0) {
      lx.push_back(std::log(grid[j]));
      ly.push_back(std::log(r2[j] / m));
    }
  }
  if (lx.size() >= 2) {
    const LinearFit fit = linear_fit(lx, ly);
    out.verdicts.push_back(verdict("range-second-moment-growth", fit.slope, 2.1, fit.slope <= 2.1,
                                   "log-log slope of E[r(t)^2] over t >= 8"));
  }
  return out;
}

}  // namespace trapkit::driver
