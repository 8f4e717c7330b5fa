#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "trapkit/dynamics.hpp"
#include "trapkit/explore.hpp"
#include "trapkit/summary.hpp"

using namespace trapkit;

namespace {

Environment constant_env(int dim, double tau) {
  EnvParams p;
  p.dim = dim;
  p.table = InverseCdfTable::constant(tau);
  return Environment(p);
}

Environment pareto_env(int dim, std::uint64_t seed, double alpha = 0.5) {
  EnvParams p;
  p.dim = dim;
  p.seed = seed;
  p.alpha = alpha;
  return Environment(p);
}

const std::vector<DynamicsSpec> kAll{DynamicsSpec::bouchaud(0.3), DynamicsSpec::metropolis(),
                                     DynamicsSpec::heat_bath()};

}  // namespace

TEST_SUITE("dynamics") {
  TEST_CASE("rates and conductances") {
    CHECK(jump_rate(4, 9, DynamicsSpec::bouchaud(0.5)) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(jump_rate(2, 1, DynamicsSpec::metropolis()) == 0.5);
    CHECK(jump_rate(3, 3, DynamicsSpec::heat_bath()) == 0.5);
    CHECK(edge_conductance(4, 9, DynamicsSpec::bouchaud(0.5)) == doctest::Approx(6.0).epsilon(1e-15));
    CHECK(edge_conductance(7, 123, DynamicsSpec::bouchaud(0.0)) == 1.0);
    CHECK(edge_conductance(3, 5, DynamicsSpec::metropolis()) == 3.0);
    CHECK(edge_conductance(2, 6, DynamicsSpec::heat_bath()) == doctest::Approx(1.5));
  }

  TEST_CASE("spec validation") {
    CHECK_THROWS(DynamicsSpec::bouchaud(1.5).validate());
    CHECK_THROWS(DynamicsSpec::bouchaud(-0.1).validate());
    CHECK(variant_from_string(to_string(Variant::HeatBath)) == Variant::HeatBath);
    CHECK_THROWS(variant_from_string("glauber"));
  }

  TEST_CASE("detailed balance, symmetry and lower bound on random pairs") {
    RngStream rng(1);
    for (int k = 0; k < 10000; ++k) {
      const double tx = pareto_depth(rng.uniform(), 0.5), ty = pareto_depth(rng.uniform(), 0.5);
      for (const auto& s : kAll) {
        const double l = tx * jump_rate(tx, ty, s), r = ty * jump_rate(ty, tx, s);
        REQUIRE(std::abs(l - r) / std::max(l, r) <= 1e-12);
        REQUIRE(edge_conductance(tx, ty, s) == edge_conductance(ty, tx, s));
      }
      REQUIRE(edge_conductance(tx, ty, DynamicsSpec::bouchaud(0.3)) >= 1.0);
    }
  }

  TEST_CASE("constant environment: holding times and linear clock") {
    const Environment env = constant_env(3, 1.0);
    WalkStreams st = WalkStreams::derived(5, 0);
    const auto w = simulate_time_changed_walk(env, DynamicsSpec::bouchaud(0.0), StopRule::steps(10000), st);
    std::vector<double> holds;
    for (std::size_t k = 0; k < w.path.steps(); ++k) holds.push_back(w.path.exit_time(k) - w.path.entry_time(k));
    const double m = mean_of(holds), se = std::sqrt(variance_of(holds) / holds.size());
    CHECK(std::abs(m - 1.0 / 6.0) <= 3 * se);
    for (double t : {0.0, 1.0, 100.0, w.clock.horizon()}) CHECK(w.clock.value_at(t) == doctest::Approx(t));

    const Environment deep = constant_env(2, 5.0);
    WalkStreams s2 = WalkStreams::derived(6, 0);
    const auto d = simulate_time_changed_walk(deep, DynamicsSpec::bouchaud(1.0), StopRule::time(50.0), s2);
    CHECK(d.clock.value_at(10.0) == doctest::Approx(50.0));
    CHECK(d.clock.inverse_at(10.0) == doctest::Approx(2.0));
  }

  TEST_CASE("paths are nearest-neighbour with increasing times") {
    const Environment env = pareto_env(5, 3);
    WalkStreams st = WalkStreams::derived(1, 2);
    const auto w = simulate_time_changed_walk(env, DynamicsSpec::bouchaud(0.3), StopRule::steps(5000), st);
    REQUIRE(w.path.steps() == 5000);
    for (std::size_t k = 1; k < w.path.segments(); ++k) {
      REQUIRE(are_neighbours(w.path.site(k - 1), w.path.site(k), 5));
      if (k >= 2) REQUIRE(w.path.entry_time(k) > w.path.entry_time(k - 1));
    }
    for (std::size_t k = 0; k < w.clock.slopes().size(); ++k) REQUIRE(w.clock.slopes()[k] >= 1.0);
  }

  TEST_CASE("holding time at a site matches its total conductance") {
    const Environment env = pareto_env(1, 8);
    const DynamicsSpec spec = DynamicsSpec::bouchaud(0.3);
    WalkStreams st = WalkStreams::derived(2, 3);
    const auto w = simulate_time_changed_walk(env, spec, StopRule::steps(20000), st);
    // Normalized holds hold * total rate are Exp(1) whatever the site.
    std::vector<double> z;
    for (std::size_t k = 0; k < w.path.steps(); ++k) {
      const Site x = w.path.site(k);
      const double tx = env.tau_at(x);
      const double rate = edge_conductance(tx, env.tau_at(neighbour(x, 0)), spec) +
                          edge_conductance(tx, env.tau_at(neighbour(x, 1)), spec);
      z.push_back((w.path.exit_time(k) - w.path.entry_time(k)) * rate);
    }
    const double m = mean_of(z), se = std::sqrt(variance_of(z) / z.size());
    CHECK(std::abs(m - 1.0) <= 3 * se);
  }

  TEST_CASE("direct walk shares the embedded chain and is slower by tau") {
    const Environment env = pareto_env(2, 4);
    const DynamicsSpec spec = DynamicsSpec::bouchaud(0.3);
    WalkStreams a = WalkStreams::derived(9, 1), b = WalkStreams::derived(9, 1);
    const auto hat = simulate_time_changed_walk(env, spec, StopRule::steps(4000), a);
    const PathSample x = simulate_direct_walk(env, spec, StopRule::steps(4000), b);
    REQUIRE(hat.path.steps() == x.steps());
    for (std::size_t k = 0; k < x.steps(); ++k) REQUIRE(hat.path.jumps[k].site == x.jumps[k].site);
    // Same holding stream: each X hold is the X-hat hold times tau_x, up to
    // the rounding of the absolute jump times.
    for (std::size_t k = 0; k < x.steps(); ++k) {
      const double tau = env.tau_at(x.site(k));
      const double hx = x.exit_time(k) - x.entry_time(k);
      const double hh = hat.path.exit_time(k) - hat.path.entry_time(k);
      REQUIRE(std::abs(hx - tau * hh) <= 1e-12 * (x.exit_time(k) + tau * hat.path.exit_time(k)));
    }

    const Environment flat = constant_env(2, 2.0);
    WalkStreams c = WalkStreams::derived(3, 3);
    const PathSample y = simulate_direct_walk(flat, DynamicsSpec::bouchaud(1.0), StopRule::steps(10000), c);
    std::vector<double> holds;
    for (std::size_t k = 0; k < y.steps(); ++k) holds.push_back(y.exit_time(k) - y.entry_time(k));
    CHECK(std::abs(mean_of(holds) - 1.0 / 8.0) <= 3 * std::sqrt(variance_of(holds) / holds.size()));
  }

  TEST_CASE("clock inverse round trip") {
    const Environment env = pareto_env(3, 12);
    WalkStreams st = WalkStreams::derived(4, 4);
    const auto w = simulate_time_changed_walk(env, DynamicsSpec::bouchaud(0.3), StopRule::steps(3000), st);
    RngStream rng(2);
    const double total = w.clock.total();
    for (int k = 0; k < 100; ++k) {
      const double a = rng.uniform() * total;
      REQUIRE(w.clock.value_at(w.clock.inverse_at(a)) == doctest::Approx(a).epsilon(1e-12));
    }
    CHECK_THROWS_AS(w.clock.inverse_at(total * 1.01), std::out_of_range);
    CHECK(clock_inverse_at(w.clock, 0.0) == 0.0);
  }

  TEST_CASE("clock-bounded walks can be inverted at their bound") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const Environment env = pareto_env(5, seed);
      WalkStreams st = WalkStreams::derived(seed, 7);
      const double bound = 1e8;
      const auto w = simulate_time_changed_walk(env, DynamicsSpec::bouchaud(0.3), StopRule::clock(bound), st);
      REQUIRE_NOTHROW(w.clock.inverse_at(bound));
      REQUIRE_NOTHROW(direct_position(w, bound));
    }
  }

  TEST_CASE("rescaled clock") {
    const Environment env = constant_env(2, 1.0);
    WalkStreams st = WalkStreams::derived(1, 1);
    const auto w = simulate_time_changed_walk(env, DynamicsSpec::bouchaud(0.0), StopRule::time(1000.0), st);
    const RescaledClock one = rescaled_clock(w.clock, 1.0, 0.5);
    CHECK(one(3.0) == doctest::Approx(w.clock.value_at(3.0)));
    const RescaledClock h = rescaled_clock(w.clock, 0.01, 0.5);
    CHECK(h(2.0) == doctest::Approx(0.02));
    CHECK_THROWS_AS(h(20.0), std::out_of_range);
  }

  TEST_CASE("H is the sum of local times times depths") {
    const Environment env = pareto_env(5, 21);
    WalkStreams st = WalkStreams::derived(8, 8);
    const auto w = simulate_time_changed_walk(env, DynamicsSpec::bouchaud(0.3), StopRule::time(200.0), st);
    const double eps = 0.01, alpha = 0.5, t = 1.5;
    std::map<std::vector<std::int32_t>, Site> sites;
    for (std::size_t k = 0; k < w.path.segments(); ++k) sites.emplace(coordinates(w.path.site(k), 5), w.path.site(k));
    ExactSum s;
    for (const auto& [key, x] : sites) s.add(local_time(w.path, x, t / eps) * env.tau_at(x));
    CHECK(rescaled_clock(w.clock, eps, alpha)(t) == doctest::Approx(eps * eps * s.value()).epsilon(1e-10));
  }

  TEST_CASE("empty path is reported") {
    const Environment env = constant_env(1, 1.0);
    WalkStreams st = WalkStreams::derived(1, 1);
    CHECK_THROWS_AS(simulate_time_changed_walk(env, DynamicsSpec::bouchaud(0.0), StopRule::time(1e-12), st),
                    std::runtime_error);
    StopRule none;
    CHECK_THROWS(none.validate());
  }
}
