#include <algorithm>
#include <cmath>

#include "driver/common.hpp"
#include "driver/experiments.hpp"
#include "trapkit/explore.hpp"
#include "trapkit/green.hpp"
#include "trapkit/rng.hpp"
#include "trapkit/summary.hpp"

namespace trapkit::driver {

namespace {

// Bootstrap standard deviation of the product of two independent sample
// means.
double product_bootstrap_se(const std::vector<double>& x, const std::vector<double>& y, RngStream& rng,
                            std::size_t resamples = 400) {
  std::vector<double> prods;
  prods.reserve(resamples);
  for (std::size_t b = 0; b < resamples; ++b) {
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sx += x[rng.index(x.size())];
    for (std::size_t i = 0; i < y.size(); ++i) sy += y[rng.index(y.size())];
    prods.push_back(sx / static_cast<double>(x.size()) * sy / static_cast<double>(y.size()));
  }
  return std::sqrt(variance_of(prods));
}

}  // namespace

ExperimentOutput run_characterize(StageRunner& runner) {
  const ExperimentConfig& c = runner.config();
  const std::size_t range_reps = c.option_count("range_replicas", 100);
  const double range_time = c.option("range_time", 200.0);
  const double search = c.option("search_rescaled", 0.05);
  const std::size_t fresh = c.option_count("fresh_samples", 100000);
  const std::size_t pool_size = c.option_count("pool_size", 400);
  const double eps = c.epsilons.back();
  const double delta = c.deltas.front();
  const int n = c.box_radii.front();

  std::vector<TestFunction> fs;
  for (const auto& name : c.test_functions) fs.push_back(test_function(name));

  const std::vector<double> slopes = range_constant_stage(runner, "range", range_reps, range_time);
  const Estimate ch = mean_estimate(slopes);

  // Environment seen from the first deep trap: G-bar_n on the masked box
  // around it and each test function.
  const auto traps = runner.run_stage("first-trap", c.replicas, [&](const TaskContext& ctx) {
    const Environment env = replica_env(c, ctx.seed);
    WalkStreams st = replica_streams(ctx.seed);
    const auto walk = simulate_time_changed_walk(env, c.dynamics, StopRule::time(search / eps), st);
    DeepTrapOptions o;
    o.epsilon = eps;
    o.delta = delta;
    o.spec = c.dynamics;
    o.record_window_radius = 0;
    const auto found = collect_deep_traps(walk.path, env, o);
    json r;
    r["replica"] = ctx.index;
    r["found"] = !found.empty();
    if (found.empty()) return std::vector<json>{r};
    const DeepTrapRecord& first = found.front();
    r["t"] = eps * first.discovery_time;
    r["scaled_depth"] = first.scaled_depth;
    r["gbar"] = green_bar(env.window(first.site, n + 1, true), n, c.dynamics).value;
    json h = json::array();
    for (const auto& f : fs) h.push_back(evaluate(f, env, first.site));
    r["h"] = h;
    return std::vector<json>{r};
  });

  constexpr std::size_t kChunk = 10000;
  const auto fresh_rows = runner.run_stage("fresh", (fresh + kChunk - 1) / kChunk, [&](const TaskContext& ctx) {
    const std::size_t m = std::min(kChunk, fresh - ctx.index * kChunk);
    std::vector<ExactSum> s(fs.size()), s2(fs.size());
    for (std::size_t i = 0; i < m; ++i) {
      EnvParams p = c.env;
      p.seed = derive_seed(ctx.seed, i, 1);
      const Environment env(p);
      for (std::size_t k = 0; k < fs.size(); ++k) {
        const double v = evaluate(fs[k], env, Site::origin());
        s[k].add(v);
        s2[k].add(v * v);
      }
    }
    json r;
    r["chunk"] = ctx.index;
    r["samples"] = m;
    json sums = json::array(), sq = json::array();
    for (std::size_t k = 0; k < fs.size(); ++k) {
      sums.push_back(s[k].value());
      sq.push_back(s2[k].value());
    }
    r["sum"] = sums;
    r["sum_sq"] = sq;
    return std::vector<json>{r};
  });

  const std::vector<double> pool = greenbar_pool_stage(runner, "greenbar-pool", pool_size, n);

  ExperimentOutput out;
  out.summary.push_back({"c_hat", NAN, NAN, NAN, range_time, ch.value, ch.std_error});

  std::vector<double> gbar;
  std::vector<std::vector<double>> gh(fs.size());
  std::size_t missing = 0;
  for (const auto& r : traps) {
    if (!r["found"].get<bool>()) {
      ++missing;
      continue;
    }
    const double g = r["gbar"].get<double>();
    gbar.push_back(g);
    for (std::size_t k = 0; k < fs.size(); ++k) gh[k].push_back(g * r["h"][k].get<double>());
  }
  std::vector<double> total(fs.size(), 0.0), total_sq(fs.size(), 0.0);
  double count = 0.0;
  for (const auto& r : fresh_rows) {
    count += r["samples"].get<double>();
    for (std::size_t k = 0; k < fs.size(); ++k) {
      total[k] += r["sum"][k].get<double>();
      total_sq[k] += r["sum_sq"][k].get<double>();
    }
  }

  RngStream rng(derive_seed(c.seed, 0, 11));
  const std::string note_missing = missing ? "; " + std::to_string(missing) + " walks without a deep trap" : "";
  if (gbar.size() < 2) {
    out.verdicts.push_back(verdict("characterization", NAN, 3.0, false, "no deep traps found" + note_missing));
    return out;
  }
  for (std::size_t k = 0; k < fs.size(); ++k) {
    const double lhs = ch.value * mean_of(gh[k]);
    const double rhs = total[k] / count;
    const double var_rhs = (total_sq[k] / count - rhs * rhs) * count / (count - 1.0);
    const double se = std::hypot(product_bootstrap_se(slopes, gh[k], rng), std::sqrt(var_rhs / count));
    const double z = std::abs(lhs - rhs) / se;
    out.verdicts.push_back(verdict("characterization " + fs[k].name, z, 3.0, z <= 3.0,
                                   "c-hat E[G-bar h] = " + fmt(lhs) + " vs E[h] = " + fmt(rhs) + ", " +
                                       std::to_string(gbar.size()) + " first traps" + note_missing));
    out.summary.push_back({"characterization_lhs_" + fs[k].name, eps, delta, NAN, NAN, lhs, NAN});
    out.summary.push_back({"characterization_rhs_" + fs[k].name, eps, delta, NAN, NAN, rhs, std::sqrt(var_rhs / count)});
  }
  // h == 1 gives c E[G-bar(tau_delta(1))] = 1.
  out.summary.push_back({"c_hat_times_trap_gbar_mean", eps, delta, NAN, NAN, ch.value * mean_of(gbar),
                         product_bootstrap_se(slopes, gbar, rng)});

  std::vector<double> inv;
  for (double g : pool) inv.push_back(1.0 / g);
  const BootstrapResult bi = bootstrap_mean(inv, rng);
  const double se = std::hypot(ch.std_error, bi.std_error);
  const double z = std::abs(ch.value - bi.estimate) / se;
  out.verdicts.push_back(verdict("range-constant-vs-inverse-greenbar", z, 3.0, z <= 3.0,
                                 "c-hat = " + fmt(ch.value) + ", E[1/G-bar_" + std::to_string(n) +
                                     "] = " + fmt(bi.estimate) + " from " + std::to_string(pool.size()) + " draws"));
  out.summary.push_back({"inverse_greenbar_mean", NAN, NAN, NAN, NAN, bi.estimate, bi.std_error});
  return out;
}

}  // namespace trapkit::driver
