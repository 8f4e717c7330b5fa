#pragma once

#include "driver/config.hpp"
#include "driver/runner.hpp"

namespace trapkit::driver {

/// Detailed balance, conductance symmetry and bounds on random depth pairs.
/// options: pairs (10000).
ExperimentOutput run_balance(StageRunner& runner);

/// Exploration i.i.d. property and the range law of large numbers.
/// horizons.steps (10000) per walk; horizons.time (64) is the t of the
/// r(t)/t vs r(2t)/(2t) comparison; options: histogram_bins (16384).
ExperimentOutput run_range(StageRunner& runner);

/// Deep traps per epsilon: Poisson discovery, depth law, excess times,
/// independence and the M1 step approximation. horizons.rescaled (0.2) is
/// the discovery cutoff in rescaled time; options: horizon_factor (2),
/// green (true), green_max_epsilon (1), record_window (0), m1_refinement
/// (400). Poisson, depth and excess verdicts are taken at the smallest
/// epsilon; the others only feed the summary.
ExperimentOutput run_deep_traps(StageRunner& runner);

/// Conductance-Green identity, sandwich bounds, and reference values on
/// finite boxes. options: dims ([1, 2, 3]), variants (["bouchaud",
/// "metropolis"]), srw_n ([1, 2, 3]), srw_mc_reps (4000).
ExperimentOutput run_green(StageRunner& runner);

/// Characterization identity c E[(G-bar h)(tau_delta(1))] = E[h(tau)].
/// options: range_replicas (100), range_time (200), search_rescaled (0.05),
/// fresh_samples (100000), pool_size (400).
ExperimentOutput run_characterize(StageRunner& runner);

/// Laplace exponents: psi, psi_delta, the reference H_delta sampler and the
/// simulated clock across the epsilon grid. horizons.rescaled sets the
/// evaluation time (default 1 / psi(1)); options: pool_size (400),
/// psi_samples (200000) for the Monte Carlo psi_delta checked against the
/// exact pool value, reference_paths (4000).
ExperimentOutput run_clock(StageRunner& runner);

/// Stable subordinator checks and fractional-kinetics marginals.
/// options: stable_draws (10000), scale (1), reference_paths (4000),
/// grid_step (0.001), t_min (0.01), t_max (1), t_points (9).
ExperimentOutput run_fk(StageRunner& runner);

/// Variance across fixed environments of the quenched Laplace transform of
/// H^(eps)(t), t = horizons.rescaled (1). replicas = environments; options:
/// walks_per_env (20), lambda (default: psi(lambda) t = 1, from a G-bar pool
/// of pool_size (200)).
ExperimentOutput run_quenched(StageRunner& runner);

ExperimentOutput dispatch(StageRunner& runner);

}  // namespace trapkit::driver
