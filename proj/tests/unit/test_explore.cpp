#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "trapkit/explore.hpp"
#include "trapkit/stats.hpp"
#include "trapkit/summary.hpp"

using namespace trapkit;

namespace {

Environment pareto_env(int dim, std::uint64_t seed) {
  EnvParams p;
  p.dim = dim;
  p.seed = seed;
  return Environment(p);
}

PathSample still_path(int dim, double horizon) {
  PathSample p;
  p.dim = dim;
  p.horizon = horizon;
  return p;
}

}  // namespace

TEST_SUITE("explore") {
  TEST_CASE("a path that never moves") {
    const PathSample p = still_path(1, 5.0);
    const DiscoveryState ds = discovery_sequence(p);
    REQUIRE(ds.size() == 3);
    CHECK(ds.sites[0] == make_site({-1}));
    CHECK(ds.sites[1] == make_site({0}));
    CHECK(ds.sites[2] == make_site({1}));
    for (double t : ds.times) CHECK(t == 0.0);
    CHECK(range_process(ds).at(0.0) == 3);
    CHECK(local_time(p, Site::origin(), 2.5) == 2.5);
    CHECK(local_time(p, make_site({1}), 2.5) == 0.0);
  }

  TEST_CASE("one step in d = 2 discovers three new sites") {
    PathSample p = still_path(2, 2.0);
    p.jumps.push_back({1.0, Site::unit(0)});
    const DiscoveryState ds = discovery_sequence(p);
    CHECK(ds.size() == 8);
    const RangeProcess r = range_process(ds);
    CHECK(r.at(0.5) == 5);
    CHECK(r.at(1.0) == 8);
    CHECK(r.max_jump() == 5);
  }

  TEST_CASE("discovery invariants on a simulated walk") {
    const Environment env = pareto_env(5, 2);
    WalkStreams st = WalkStreams::derived(3, 1);
    const auto w = simulate_time_changed_walk(env, DynamicsSpec::bouchaud(0.3), StopRule::steps(5000), st);
    const DiscoveryState ds = discovery_sequence(w.path);
    std::set<std::vector<std::int32_t>> seen;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      REQUIRE(seen.insert(coordinates(ds.sites[i], 5)).second);
      if (i) REQUIRE(ds.times[i] >= ds.times[i - 1]);
      const Site& at = w.path.site(ds.segment[i]);
      REQUIRE((at == ds.sites[i] || are_neighbours(at, ds.sites[i], 5)));
    }
    const RangeProcess r = range_process(ds);
    CHECK(r.at(0.0) == 11);
    CHECK(r.max_jump() <= 11);
    for (std::size_t k = 1; k < r.counts.size(); ++k) REQUIRE(r.counts[k] > r.counts[k - 1]);
  }

  TEST_CASE("local times partition the elapsed time") {
    const Environment env = pareto_env(3, 4);
    WalkStreams st = WalkStreams::derived(2, 2);
    const auto w = simulate_time_changed_walk(env, DynamicsSpec::bouchaud(0.3), StopRule::steps(2000), st);
    std::set<std::vector<std::int32_t>> keys;
    std::vector<Site> sites;
    for (std::size_t k = 0; k < w.path.segments(); ++k) {
      if (keys.insert(coordinates(w.path.site(k), 3)).second) sites.push_back(w.path.site(k));
    }
    const double t = 0.7 * w.path.horizon;
    ExactSum s;
    for (const Site& x : sites) s.add(local_time(w.path, x, t));
    CHECK(s.value() == doctest::Approx(t).epsilon(1e-12));
    const std::vector<double> all = local_times(w.path, sites);
    for (std::size_t i = 0; i < sites.size(); ++i) {
      CHECK(all[i] == doctest::Approx(local_time(w.path, sites[i], w.path.horizon)).epsilon(1e-12));
    }
  }

  TEST_CASE("pooled discovered depths are Pareto and uncorrelated") {
    std::vector<double> depths, deep;
    for (std::uint64_t r = 0; r < 40; ++r) {
      const Environment env = pareto_env(5, 100 + r);
      WalkStreams st = WalkStreams::derived(7, r);
      const auto w = simulate_time_changed_walk(env, DynamicsSpec::bouchaud(0.3), StopRule::steps(2000), st);
      const DiscoveryState ds = discovery_sequence(w.path);
      for (const Site& x : ds.sites) {
        depths.push_back(env.tau_at(x));
        deep.push_back(env.tau_at(x) >= 2.0);
      }
    }
    const KsResult ks = ks_test(depths, [](double y) { return y < 1 ? 0.0 : 1.0 - std::pow(y, -0.5); });
    CHECK(ks.pass);
    for (std::size_t lag = 1; lag <= 5; ++lag) {
      CHECK(std::abs(autocorrelation(deep, lag)) <= 4.0 / std::sqrt(static_cast<double>(deep.size())));
    }
  }

  TEST_CASE("deep traps") {
    const Environment env = pareto_env(5, 5);
    WalkStreams st = WalkStreams::derived(4, 4);
    const auto w = simulate_time_changed_walk(env, DynamicsSpec::bouchaud(0.3), StopRule::steps(20000), st);
    DeepTrapOptions o;
    o.epsilon = 1e-2;
    o.delta = 1.0;
    o.spec = DynamicsSpec::bouchaud(0.3);
    o.green_box = 2;
    const auto traps = collect_deep_traps(w.path, env, o);
    REQUIRE(!traps.empty());
    for (std::size_t i = 0; i < traps.size(); ++i) {
      const auto& t = traps[i];
      CHECK(t.scaled_depth >= o.delta);
      CHECK(t.scaled_depth == doctest::Approx(std::pow(o.epsilon, 2.0) * t.depth));
      if (i) CHECK(t.discovery_time >= traps[i - 1].discovery_time);
      CHECK(t.visited == (t.local_time > 0.0));
      if (t.visited) {
        REQUIRE(t.excess.has_value());
        CHECK(*t.excess == doctest::Approx(t.local_time / *t.green_at_trap));
      }
      REQUIRE(t.env_window.has_value());
      CHECK(t.env_window->masked());
    }
    o.delta = 1e12;
    CHECK(collect_deep_traps(w.path, env, o).empty());
  }

  TEST_CASE("restricted functionals") {
    EnvParams flat;
    flat.dim = 3;
    flat.table = InverseCdfTable::constant(1.0);
    const Environment one(flat);
    WalkStreams st = WalkStreams::derived(1, 1);
    const auto w = simulate_time_changed_walk(one, DynamicsSpec::bouchaud(0.0), StopRule::time(500.0), st);
    CHECK(restricted_additive_functional(w.path, one, AdditiveWeight::depth(), 0.01, 0.0, 2.0) ==
          doctest::Approx(0.02));
    CHECK(restricted_additive_functional(w.path, one, AdditiveWeight::depth(), 0.01, 1.0, 2.0) == 0.0);

    const Environment env = pareto_env(5, 6);
    WalkStreams s2 = WalkStreams::derived(2, 6);
    const auto v = simulate_time_changed_walk(env, DynamicsSpec::bouchaud(0.3), StopRule::time(300.0), s2);
    const double eps = 0.01, t = 2.5;
    const double h = rescaled_clock(v.clock, eps, 0.5)(t);
    const double h0 = restricted_additive_functional(v.path, env, AdditiveWeight::depth(), eps, 0.0, t);
    CHECK(h0 == doctest::Approx(h).epsilon(1e-10));
    double prev = h0;
    for (double delta : {0.01, 0.1, 1.0}) {
      const double hd = restricted_additive_functional(v.path, env, AdditiveWeight::depth(), eps, delta, t);
      CHECK(hd <= prev * (1 + 1e-12));
      prev = hd;
    }
    // Depth weight regroups as local times of deep traps times scaled depths.
    DeepTrapOptions o;
    o.epsilon = eps;
    o.delta = 0.1;
    o.record_window_radius = 0;
    const auto traps = collect_deep_traps(v.path, env, o);
    double sum = 0.0;
    for (const auto& r : traps) sum += local_time(v.path, r.site, t / eps) * r.scaled_depth;
    CHECK(restricted_additive_functional(v.path, env, AdditiveWeight::depth(), eps, 0.1, t) ==
          doctest::Approx(sum).epsilon(1e-10));

    const MonotonePath full = restricted_clock_path(v.path, env, eps, 0.0);
    const MonotonePath part = restricted_clock_path(v.path, env, eps, 0.1);
    for (double s : {0.1, 0.5, 1.0, 2.0, 2.9}) CHECK(part.value_at(s) <= full.value_at(s) * (1 + 1e-12));
  }

  TEST_CASE("step approximation") {
    DeepTrapRecord r;
    r.discovery_time = 100.0;
    r.local_time = 0.0;
    const MonotonePath z = step_approximation(r, 0.01, 3.0);
    CHECK(z.value_at(2.0) == 0.0);
    r.local_time = 2.5;
    const MonotonePath s = step_approximation(r, 0.01, 3.0);
    CHECK(s.value_at(0.999) == 0.0);
    CHECK(s.value_at(1.0) == 2.5);
  }

  TEST_CASE("site set") {
    SiteSet s(5, 4);
    RngStream rng(3);
    std::set<std::vector<std::int32_t>> ref;
    for (int k = 0; k < 5000; ++k) {
      Site x;
      for (int i = 0; i < 5; ++i) x[i] = static_cast<std::int32_t>(rng.index(21)) - 10;
      if (k % 100 == 0) x[0] = 1 << 20;  // outside the packed range
      CHECK(s.insert(x) == ref.insert(coordinates(x, 5)).second);
    }
    CHECK(s.size() == ref.size());
  }
}
