#include <algorithm>
#include <cmath>

#include "driver/common.hpp"
#include "driver/experiments.hpp"
#include "trapkit/rng.hpp"

namespace trapkit::driver {

ExperimentOutput run_balance(StageRunner& runner) {
  const ExperimentConfig& c = runner.config();
  const std::size_t pairs = c.option_count("pairs", 10000);
  constexpr std::size_t kChunk = 1000;
  const std::size_t tasks = (pairs + kChunk - 1) / kChunk;

  const auto rows = runner.run_stage("pairs", tasks, [&](const TaskContext& ctx) {
    RngStream rng(ctx.seed);
    const std::size_t m = std::min(kChunk, pairs - ctx.index * kChunk);
    double worst_balance[3] = {0, 0, 0};
    std::size_t asymmetric = 0;
    std::size_t below_one = 0;
    double worst_factor = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double tx = pareto_depth(rng.uniform(), c.env.alpha);
      const double ty = pareto_depth(rng.uniform(), c.env.alpha);
      const DynamicsSpec specs[3] = {DynamicsSpec::bouchaud(rng.uniform_half_open()), DynamicsSpec::metropolis(),
                                     DynamicsSpec::heat_bath()};
      for (int v = 0; v < 3; ++v) {
        const double fwd = tx * jump_rate(tx, ty, specs[v]);
        const double bwd = ty * jump_rate(ty, tx, specs[v]);
        worst_balance[v] = std::max(worst_balance[v], std::abs(fwd - bwd) / std::max(fwd, bwd));
        if (edge_conductance(tx, ty, specs[v]) != edge_conductance(ty, tx, specs[v])) ++asymmetric;
        const double c_xy = edge_conductance(tx, ty, specs[v]);
        worst_factor = std::max(worst_factor, std::abs(c_xy - fwd) / c_xy);
      }
      if (edge_conductance(tx, ty, specs[0]) < 1.0) ++below_one;
    }
    json r;
    r["task"] = ctx.index;
    r["pairs"] = m;
    r["balance_bouchaud"] = worst_balance[0];
    r["balance_metropolis"] = worst_balance[1];
    r["balance_heat_bath"] = worst_balance[2];
    r["asymmetric"] = asymmetric;
    r["bouchaud_below_one"] = below_one;
    r["conductance_vs_rate"] = worst_factor;
    return std::vector<json>{r};
  });

  double worst = 0.0, factor = 0.0;
  std::size_t asym = 0, below = 0, total = 0;
  for (const auto& r : rows) {
    worst = std::max({worst, r["balance_bouchaud"].get<double>(), r["balance_metropolis"].get<double>(),
                      r["balance_heat_bath"].get<double>()});
    asym += r["asymmetric"].get<std::size_t>();
    below += r["bouchaud_below_one"].get<std::size_t>();
    factor = std::max(factor, r["conductance_vs_rate"].get<double>());
    total += r["pairs"].get<std::size_t>();
  }
  ExperimentOutput out;
  out.verdicts.push_back(verdict("detailed-balance", worst, 1e-12, worst <= 1e-12,
                                 std::to_string(total) + " random pairs, all three dynamics"));
  out.verdicts.push_back(verdict("conductance-symmetry", static_cast<double>(asym), 0.0, asym == 0,
                                 "bit-exact c(x,y) == c(y,x)"));
  out.verdicts.push_back(verdict("conductance-lower-bound", static_cast<double>(below), 0.0, below == 0,
                                 "a-dynamics conductances >= 1"));
  out.verdicts.push_back(verdict("conductance-equals-tau-times-rate", factor, 1e-12, factor <= 1e-12));
  out.summary.push_back({"max_balance_error", NAN, NAN, NAN, NAN, worst, NAN});
  return out;
}

}  // namespace trapkit::driver
