#include <algorithm>
#include <cmath>

#include "driver/common.hpp"
#include "driver/experiments.hpp"
#include "trapkit/green.hpp"
#include "trapkit/rng.hpp"
#include "trapkit/stats.hpp"

namespace trapkit::driver {

namespace {

// Return probability of the simple random walk on Z^5 (Montroll).
constexpr double kSrwReturn5 = 0.135178;

std::vector<DynamicsSpec> variant_list(const ExperimentConfig& c) {
  std::vector<std::string> names{"bouchaud", "metropolis"};
  if (auto it = c.options.find("variants"); it != c.options.end()) {
    names.clear();
    for (const auto& v : *it) names.push_back(v.get<std::string>());
  }
  std::vector<DynamicsSpec> out;
  for (const auto& name : names) {
    const Variant v = variant_from_string(name);
    if (v == Variant::BouchaudA) {
      out.push_back(DynamicsSpec::bouchaud(c.dynamics.variant == Variant::BouchaudA ? c.dynamics.a : 0.3));
    } else {
      out.push_back({v, 0.0});
    }
  }
  return out;
}

}  // namespace

ExperimentOutput run_green(StageRunner& runner) {
  const ExperimentConfig& c = runner.config();
  const std::vector<double> dims = c.option_list("dims", {1, 2, 3});
  const std::vector<DynamicsSpec> variants = variant_list(c);
  const std::vector<int> radii = c.box_radii;
  constexpr double tol = 1e-8;

  ExperimentOutput out;

  // Hand-solved reference: d = 1, n = 1, tau == 1, a = 0.
  const auto ref_rows = runner.run_stage("reference", 1, [](const TaskContext&) {
    EnvParams p;
    p.dim = 1;
    p.table = InverseCdfTable::constant(1.0);
    const Environment env(p);
    const EnvWindow w = env.window(Site::origin(), 2, false);
    const DynamicsSpec srw = DynamicsSpec::bouchaud(0.0);
    json r;
    r["G"] = solve_green_box(w, 1, srw).value;
    r["C"] = effective_conductance(w, 1, srw, Boundary::Origin);
    r["Cbar"] = effective_conductance(w, 1, srw, Boundary::Neighbourhood);
    r["Gbar"] = green_bar(w, 1, srw).value;
    return std::vector<json>{r};
  });
  {
    const json& r = ref_rows.front();
    const double err = std::max({std::abs(r["G"].get<double>() - 1.0), std::abs(r["C"].get<double>() - 1.0),
                                 std::abs(r["Cbar"].get<double>() - 2.0), std::abs(r["Gbar"].get<double>() - 0.5)});
    out.verdicts.push_back(verdict("hand-solved-reference", err, 1e-12, err <= 1e-12,
                                   "G1 = " + fmt(r["G"].get<double>()) + ", C1 = " + fmt(r["C"].get<double>()) +
                                       ", Cbar1 = " + fmt(r["Cbar"].get<double>()) +
                                       ", Gbar1 = " + fmt(r["Gbar"].get<double>())));
  }

  const auto rows = runner.run_stage("instances", c.replicas, [&](const TaskContext& ctx) {
    const std::size_t k = ctx.index;
    const int d = static_cast<int>(dims[k % dims.size()]);
    const int n = radii[(k / dims.size()) % radii.size()];
    const DynamicsSpec spec = variants[(k / (dims.size() * radii.size())) % variants.size()];
    EnvParams p = c.env;
    p.dim = d;
    p.seed = derive_seed(ctx.seed, 0, 1);
    const Environment env(p);
    const EnvWindow w = env.window(Site::origin(), n + 2, false);
    const GreenEstimate g = solve_green_box(w, n, spec);
    const double g_next = solve_green_box(w, n + 1, spec).value;
    const double cn = effective_conductance(w, n, spec, Boundary::Origin);
    const double cbar = effective_conductance(w, n, spec, Boundary::Neighbourhood);
    const double gbar = green_bar(w.masked_copy(), n, spec).value;
    const double gbar_lo = green_bar(w.with_center(1.0), n, spec).value;
    const double gbar_hi = green_bar(w.with_center(1e9), n, spec).value;
    const double csrw = srw_conductance(d, n);
    const double q = min_return_probability(w, spec);
    json r;
    r["instance"] = k;
    r["d"] = d;
    r["n"] = n;
    r["dynamics"] = to_json(spec);
    r["G"] = g.value;
    r["G_next"] = g_next;
    r["C"] = cn;
    r["Cbar"] = cbar;
    r["Gbar"] = gbar;
    r["C_srw"] = csrw;
    r["qmin"] = q;
    r["residual"] = g.residual;
    r["identity_error"] = std::abs(cn * g.value - 1.0);
    r["center_shift"] = std::abs(gbar_hi - gbar_lo) / gbar;
    return std::vector<json>{r};
  });

  double worst_identity = 0.0, worst_shift = 0.0;
  std::size_t bad_c = 0, bad_g = 0, bad_mono = 0, bad_bound = 0;
  for (const auto& r : rows) {
    const double G = r["G"], Gn = r["G_next"], C = r["C"], Cb = r["Cbar"], Gb = r["Gbar"], Cs = r["C_srw"],
                 q = r["qmin"];
    worst_identity = std::max(worst_identity, r["identity_error"].get<double>());
    worst_shift = std::max(worst_shift, r["center_shift"].get<double>());
    if (!(Cs <= C * (1 + tol) && C <= Cb * (1 + tol))) ++bad_c;
    if (!(Gb <= G * (1 + tol) && G <= Gb / (q * q) * (1 + tol))) ++bad_g;
    if (!(G <= Gn * (1 + tol))) ++bad_mono;
    if (!(G <= (1 + tol) / Cs)) ++bad_bound;
  }
  const std::string inst = std::to_string(rows.size()) + " instances";
  out.verdicts.push_back(verdict("conductance-green-identity", worst_identity, tol, worst_identity <= tol,
                                 "max |C_n G_n - 1| over " + inst));
  out.verdicts.push_back(verdict("sandwich-conductance", static_cast<double>(bad_c), 0.0, bad_c == 0,
                                 "C°_n <= C_n <= Cbar_n violations over " + inst));
  out.verdicts.push_back(verdict("sandwich-green", static_cast<double>(bad_g), 0.0, bad_g == 0,
                                 "Gbar <= G <= qmin^-2 Gbar violations over " + inst));
  out.verdicts.push_back(verdict("green-monotone-in-n", static_cast<double>(bad_mono), 0.0, bad_mono == 0));
  out.verdicts.push_back(verdict("green-srw-bound", static_cast<double>(bad_bound), 0.0, bad_bound == 0,
                                 "G_n <= 1 / C°_n"));
  out.verdicts.push_back(verdict("greenbar-center-invariance", worst_shift, tol, worst_shift <= tol,
                                 "center depth 1 vs 1e9"));
  out.summary.push_back({"max_identity_error", NAN, NAN, NAN, NAN, worst_identity, NAN});

  // Simple random walk in d = 5: linear solve against Monte Carlo, and the
  // approach of 10 G_n to 1 / (1 - return probability).
  const std::vector<double> srw_n = c.option_list("srw_n", {1, 2, 3});
  const std::size_t mc_reps = c.option_count("srw_mc_reps", 4000);
  const auto srw_rows = runner.run_stage("srw", srw_n.size(), [&](const TaskContext& ctx) {
    const int n = static_cast<int>(srw_n[ctx.index]);
    EnvParams p;
    p.dim = 5;
    p.table = InverseCdfTable::constant(1.0);
    const Environment env(p);
    const DynamicsSpec srw = DynamicsSpec::bouchaud(0.0);
    const double g = solve_green_box(env.window(Site::origin(), n + 1, false), n, srw).value;
    RngStream rng(ctx.seed);
    const GreenEstimate mc = green_monte_carlo(env, srw, n, mc_reps, rng);
    json r;
    r["n"] = n;
    r["G"] = g;
    r["mc"] = mc.value;
    r["mc_se"] = mc.std_error;
    return std::vector<json>{r};
  });
  double worst_z = 0.0;
  bool increasing = true;
  double prev = 0.0, last = 0.0;
  for (const auto& r : srw_rows) {
    const double g = r["G"], mc = r["mc"], se = r["mc_se"];
    worst_z = std::max(worst_z, std::abs(g - mc) / se);
    if (!(10.0 * g > prev)) increasing = false;
    prev = last = 10.0 * g;
    out.summary.push_back({"srw_10G_n", NAN, NAN, NAN, r["n"].get<double>(), 10.0 * g, NAN});
  }
  out.verdicts.push_back(verdict("srw-solve-vs-monte-carlo", worst_z, 3.0, worst_z <= 3.0,
                                 "max |G_n - MC| / SE in d = 5"));
  const double limit = 1.0 / (1.0 - kSrwReturn5);
  out.verdicts.push_back(verdict("srw-green-approaches-return-limit", last, limit, increasing && last <= limit,
                                 "10 G_n increasing and below 1/(1 - p_return) = " + fmt(limit)));

  // Heat-kernel decay: annealed P[X-hat_t = 0] on a dyadic grid, one fresh
  // environment per walk.
  const int hd = static_cast<int>(c.option("heat_dim", 3));
  const std::size_t walks = c.option_count("heat_walks", 20000);
  const std::vector<double> times = c.option_list("heat_times", {0.5, 1, 2, 4, 8});
  constexpr std::size_t kChunk = 1000;
  const auto heat_rows = runner.run_stage("heat-kernel", (walks + kChunk - 1) / kChunk, [&](const TaskContext& ctx) {
    const std::size_t m = std::min(kChunk, walks - ctx.index * kChunk);
    std::vector<std::size_t> at_origin(times.size(), 0);
    for (std::size_t i = 0; i < m; ++i) {
      EnvParams p = c.env;
      p.dim = hd;
      p.seed = derive_seed(ctx.seed, i, 1);
      const Environment env(p);
      WalkStreams st = WalkStreams::derived(ctx.seed, i + 1);
      const auto w = simulate_time_changed_walk(env, c.dynamics, StopRule::time(times.back()), st);
      for (std::size_t j = 0; j < times.size(); ++j) {
        if (w.path.position_at(times[j]) == Site::origin()) ++at_origin[j];
      }
    }
    json r;
    r["chunk"] = ctx.index;
    r["walks"] = m;
    r["at_origin"] = at_origin;
    return std::vector<json>{r};
  });
  std::vector<double> counts(times.size(), 0.0);
  double total = 0.0;
  for (const auto& r : heat_rows) {
    total += r["walks"].get<double>();
    for (std::size_t j = 0; j < times.size(); ++j) counts[j] += r["at_origin"][j].get<double>();
  }
  std::vector<double> lx, ly;
  for (std::size_t j = 0; j < times.size(); ++j) {
    out.summary.push_back({"heat_kernel_diagonal", NAN, NAN, NAN, times[j], counts[j] / total,
                           std::sqrt(counts[j]) / total});
    if (counts[j] >= 20.0) {
      lx.push_back(std::log(times[j]));
      ly.push_back(std::log(counts[j] / total));
    }
  }
  if (lx.size() >= 3) {
    const LinearFit fit = linear_fit(lx, ly);
    const double bound = -hd / 2.0 + 0.3;
    out.verdicts.push_back(verdict("heat-kernel-decay", fit.slope, bound, fit.slope <= bound,
                                   "log-log slope of P[X-hat_t = 0], d = " + std::to_string(hd)));
  } else {
    out.verdicts.push_back(verdict("heat-kernel-decay", NAN, -hd / 2.0 + 0.3, false,
                                   "fewer than 3 grid times with >= 20 returns"));
  }
  return out;
}

}  // namespace trapkit::driver
