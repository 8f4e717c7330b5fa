#include <doctest.h>

#include <cmath>
#include <vector>

#include "trapkit/green.hpp"
#include "trapkit/rng.hpp"

using namespace trapkit;

namespace {

Environment flat_env(int dim) {
  EnvParams p;
  p.dim = dim;
  p.table = InverseCdfTable::constant(1.0);
  return Environment(p);
}

Environment pareto_env(int dim, std::uint64_t seed) {
  EnvParams p;
  p.dim = dim;
  p.seed = seed;
  return Environment(p);
}

}  // namespace

TEST_SUITE("green") {
  TEST_CASE("hand-solved values in d = 1") {
    const EnvWindow w = flat_env(1).window(Site::origin(), 2, false);
    const DynamicsSpec srw = DynamicsSpec::bouchaud(0.0);
    CHECK(solve_green_box(w, 1, srw).value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(effective_conductance(w, 1, srw, Boundary::Origin) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(effective_conductance(w, 1, srw, Boundary::Neighbourhood) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(green_bar(w, 1, srw).value == doctest::Approx(0.5).epsilon(1e-12));
  }

  TEST_CASE("simple random walk on an interval") {
    // Killed at +-(n+1): n+1 expected visits, each of mean length 1/2.
    const DynamicsSpec srw = DynamicsSpec::bouchaud(0.0);
    for (int n = 1; n <= 6; ++n) {
      const EnvWindow w = flat_env(1).window(Site::origin(), n + 1, false);
      CHECK(solve_green_box(w, n, srw).value == doctest::Approx((n + 1) / 2.0).epsilon(1e-10));
      CHECK(srw_conductance(1, n) == doctest::Approx(2.0 / (n + 1)).epsilon(1e-10));
    }
  }

  TEST_CASE("conductance times Green is one") {
    for (int d : {1, 2, 3, 5}) {
      for (int n : {1, 2}) {
        for (auto spec : {DynamicsSpec::bouchaud(0.3), DynamicsSpec::metropolis(), DynamicsSpec::heat_bath()}) {
          const EnvWindow w = pareto_env(d, 10 * d + n).window(Site::origin(), n + 1, false);
          const double g = solve_green_box(w, n, spec).value;
          const double c = effective_conductance(w, n, spec, Boundary::Origin);
          CHECK(c * g == doctest::Approx(1.0).epsilon(1e-8));
        }
      }
    }
  }

  TEST_CASE("sandwich bounds and monotonicity") {
    constexpr double tol = 1e-8;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const int d = 1 + static_cast<int>(seed % 3);
      const EnvWindow w = pareto_env(d, seed).window(Site::origin(), 4, false);
      for (auto spec : {DynamicsSpec::bouchaud(0.3), DynamicsSpec::metropolis()}) {
        for (int n = 1; n <= 2; ++n) {
          const GreenEstimate g = solve_green_box(w, n, spec, {}, true);
          const double cn = effective_conductance(w, n, spec, Boundary::Origin);
          const double cbar = effective_conductance(w, n, spec, Boundary::Neighbourhood);
          REQUIRE(g.lower.has_value());
          REQUIRE(g.upper.has_value());
          CHECK(*g.lower <= g.value * (1 + tol));
          CHECK(g.value <= *g.upper * (1 + tol));
          CHECK(srw_conductance(d, n) <= cn * (1 + tol));
          CHECK(cn <= cbar * (1 + tol));
          CHECK(g.value <= solve_green_box(w, n + 1, spec).value * (1 + tol));
          const double q = min_return_probability(w, spec);
          CHECK(q > 0.0);
          CHECK(q <= 1.0);
        }
      }
    }
  }

  TEST_CASE("green-bar ignores the center depth") {
    const EnvWindow w = pareto_env(3, 7).window(Site::origin(), 3, false);
    const DynamicsSpec spec = DynamicsSpec::bouchaud(0.3);
    const double masked = green_bar(w.masked_copy(), 2, spec).value;
    for (double tau0 : {1.0, 3.0, 1e4, 1e9}) {
      CHECK(green_bar(w.with_center(tau0), 2, spec).value == doctest::Approx(masked).epsilon(1e-9));
    }
    CHECK_THROWS(solve_green_box(w.masked_copy(), 2, spec));
  }

  TEST_CASE("energy identity") {
    const EnvWindow w = pareto_env(2, 3).window(Site::origin(), 3, false);
    const DynamicsSpec spec = DynamicsSpec::bouchaud(0.3);
    const int n = 2;
    RngStream rng(5);
    for (int rep = 0; rep < 10; ++rep) {
      std::vector<double> f(box_volume(2, n));
      for (double& v : f) v = rng.normal();
      const double e = dirichlet_energy(w, n, spec, f);
      CHECK(e >= 0.0);
      CHECK(generator_quadratic_form(w, n, spec, f) == doctest::Approx(e).epsilon(1e-10));
    }
  }

  TEST_CASE("linear solve agrees with Monte Carlo") {
    const Environment env = pareto_env(2, 11);
    const DynamicsSpec spec = DynamicsSpec::bouchaud(0.3);
    const double g = solve_green_box(env.window(Site::origin(), 3, false), 2, spec).value;
    RngStream rng(8);
    const GreenEstimate mc = green_monte_carlo(env, spec, 2, 20000, rng);
    CHECK(mc.std_error > 0.0);
    CHECK(std::abs(mc.value - g) <= 4.0 * mc.std_error);
  }

  TEST_CASE("green-bar moments") {
    EnvParams p;
    p.dim = 3;
    const GreenbarMoments m = greenbar_moments(p, DynamicsSpec::bouchaud(0.3), 1, 200, 4, 2, 50);
    CHECK(m.samples.size() == 200);
    CHECK(m.moment_inverse > 0.0);
    CHECK(m.compare_moment_inverse.has_value());
    double s = 0.0;
    for (double g : m.samples) s += 1.0 / g;
    CHECK(m.moment_inverse == doctest::Approx(s / 200.0).epsilon(1e-12));
    // Same seed, same draws.
    const GreenbarMoments again = greenbar_moments(p, DynamicsSpec::bouchaud(0.3), 1, 200, 4);
    CHECK(again.samples == m.samples);
  }

  TEST_CASE("small windows are rejected") {
    const EnvWindow w = pareto_env(2, 1).window(Site::origin(), 2, false);
    CHECK_THROWS(solve_green_box(w, 2, DynamicsSpec::bouchaud(0.3)));
  }
}
