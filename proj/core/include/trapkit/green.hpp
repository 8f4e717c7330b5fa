#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "trapkit/dynamics.hpp"
#include "trapkit/env.hpp"
#include "trapkit/rng.hpp"

namespace trapkit {

enum class GreenMethod { LinearSolve, MonteCarlo, SrwReference };

std::string to_string(GreenMethod m);
GreenMethod green_method_from_string(const std::string& name);

struct GreenEstimate {
  double value = 0.0;
  int box_n = 0;
  GreenMethod method = GreenMethod::LinearSolve;
  /// Certificates: Gbar <= G <= qmin^{-2} Gbar for G, and the same bracket
  /// read backwards for Gbar. Absent when not computed.
  std::optional<double> lower;
  std::optional<double> upper;
  /// Relative residual of the final iterate (linear solves).
  double residual = 0.0;
  /// Monte Carlo standard error (zero for solves).
  double std_error = 0.0;
  int iterations = 0;
};

struct SolverOptions {
  double rel_tol = 1e-10;
  int max_iter = 20000;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Boundary {
  /// f(0) = 1: the conductance C_n between the origin and the outside of B_n.
  Origin,
  /// f = 1 on the closed neighbourhood D(0): C-bar_n.
  Neighbourhood
};

/// G_n(0,0) from -L g = 1_0 on B_n, g = 0 outside. L is the generator of
/// the time-changed walk with conductances edge_conductance. The window
/// must be unmasked, centered at the walk's origin, with radius >= n + 1.
/// With `certify`, also computes G-bar_n and attaches [G-bar_n, qmin^{-2} G-bar_n].
GreenEstimate solve_green_box(const EnvWindow& window, int n, const DynamicsSpec& spec,
                              const SolverOptions& opts = {}, bool certify = false);

/// C_n (origin mode) or C-bar_n (neighbourhood mode) as the Dirichlet
/// energy of the harmonic minimizer. Neighbourhood mode accepts a masked
/// window: the center depth never enters.
double effective_conductance(const EnvWindow& window, int n, const DynamicsSpec& spec,
                             Boundary boundary, const SolverOptions& opts = {});

/// G-bar_n = 1 / C-bar_n. Independent of the center depth. When the window
/// is unmasked and `certify` is set, also solves for G_n and reports the
/// bracket [qmin^2 G_n, G_n].
GreenEstimate green_bar(const EnvWindow& window, int n, const DynamicsSpec& spec,
                        const SolverOptions& opts = {}, bool certify = false);

/// C°_n: the Origin-mode conductance with all conductances equal to 1.
/// Cached per (dim, n).
double srw_conductance(int dim, int n);

/// min over neighbours y of 0 of q(y, 0) = c(y, 0) / sum_z c(y, z).
/// Needs depths on B_2; the center must be present.
double min_return_probability(const EnvWindow& window, const DynamicsSpec& spec);

/// Sum over edges touching B_n of c(x,y) (f(x) - f(y))^2, for f given on
/// B_n in box index order (coordinate 0 fastest) and zero outside.
double dirichlet_energy(const EnvWindow& window, int n, const DynamicsSpec& spec,
                        const std::vector<double>& f);

/// (-L f, f) on B_n with zero boundary, same layout as dirichlet_energy.
double generator_quadratic_form(const EnvWindow& window, int n, const DynamicsSpec& spec,
                                const std::vector<double>& f);

/// Mean total time at the origin of X-hat started at 0 and killed on leaving
/// B_{kill_radius}, with its standard error.
GreenEstimate green_monte_carlo(const Environment& env, const DynamicsSpec& spec, int kill_radius,
                                std::size_t reps, RngStream& rng);

struct GreenbarMoments {
  int n = 0;
  std::size_t reps = 0;
  double alpha = 0.0;
  /// E[Gbar^{alpha-1}].
  double moment_alpha = 0.0;
  double se_alpha = 0.0;
  /// E[Gbar^{-1}].
  double moment_inverse = 0.0;
  double se_inverse = 0.0;
  /// Same moments at a second box radius, for sensitivity reporting.
  std::optional<int> compare_n;
  std::optional<double> compare_moment_alpha;
  std::optional<double> compare_moment_inverse;
  /// The G-bar_n draws themselves, in replica order.
  std::vector<double> samples;
};

/// Moments of G-bar_n over fresh environments. Replica k uses the base
/// environment parameters with seed derive_seed(seed, k, 3).
GreenbarMoments greenbar_moments(const EnvParams& base, const DynamicsSpec& spec, int n,
                                 std::size_t reps, std::uint64_t seed,
                                 std::optional<int> compare_n = std::nullopt,
                                 std::size_t bootstrap_resamples = 400);

}  // namespace trapkit
