#include <doctest.h>

#include <algorithm>
#include <sstream>
#include <vector>

#include "trapkit/io.hpp"
#include "trapkit/paths.hpp"
#include "trapkit/summary.hpp"

using namespace trapkit;

TEST_SUITE("summary-io") {
  TEST_CASE("exact sums do not depend on order") {
    std::vector<double> v{1e100, 1.0, -1e100, 1e-30, 3.0, -2.5e-17};
    ExactSum a;
    for (double x : v) a.add(x);
    CHECK(a.value() == 4.0);
    std::sort(v.begin(), v.end());
    ExactSum b, c;
    for (std::size_t i = 0; i < v.size(); ++i) (i % 2 ? b : c).add(v[i]);
    b.merge(c);
    CHECK(b.value() == a.value());
  }

  TEST_CASE("empirical summary") {
    EmpiricalSummary s, t;
    for (double x : {1.0, 2.0, 3.0}) s.add(x);
    for (double x : {4.0, 5.0}) t.add(x);
    s.merge(t);
    CHECK(s.count() == 5);
    CHECK(s.mean() == 3.0);
    CHECK(s.variance() == doctest::Approx(2.5));
    CHECK(s.min() == 1.0);
    CHECK(s.max() == 5.0);
    CHECK(s.quantile(0.5) == 3.0);
    CHECK(s.quantile(0.125) == doctest::Approx(1.5));
    CHECK(mean_of({1.0, 2.0, 3.0}) == 2.0);
    CHECK(variance_of({1.0, 2.0, 3.0}) == 1.0);
  }

  TEST_CASE("bootstrap") {
    RngStream rng(1);
    std::vector<double> data(400);
    for (double& x : data) x = rng.normal();
    const BootstrapResult b = bootstrap_mean(data, rng);
    CHECK(b.estimate == doctest::Approx(mean_of(data)));
    CHECK(b.std_error == doctest::Approx(1.0 / 20.0).epsilon(0.25));
    CHECK(b.lower < b.estimate);
    CHECK(b.upper > b.estimate);
    RngStream r1(2), r2(2);
    CHECK(bootstrap_mean(data, r1).std_error == bootstrap_mean(data, r2).std_error);
  }

  TEST_CASE("monotone paths") {
    const MonotonePath s = MonotonePath::step(1.0, 2.0, 3.0);
    CHECK(s.value_at(0.5) == 0.0);
    CHECK(s.value_at(1.0) == 2.0);
    CHECK(s.left_limit(1.0) == 0.0);
    CHECK(s.inverse(1.0) == 1.0);
    CHECK_THROWS_AS(s.inverse(2.0), std::out_of_range);
    const MonotonePath l = MonotonePath::linear(2.0, 3.0);
    CHECK(l.value_at(1.5) == doctest::Approx(4.5));
    CHECK(l.inverse(3.0) == doctest::Approx(1.0));
    CHECK(l.restricted(4.0).value_at(3.5) == doctest::Approx(6.0));
    CHECK(l.restricted(1.0).end_time() == 1.0);
    CHECK(sup_distance(s, l, 2.0) == doctest::Approx(4.0));
    CHECK_THROWS_AS(MonotonePath({{0.0, 1.0}, {1.0, 0.0}}), std::invalid_argument);
  }

  TEST_CASE("json round trips") {
    const Site x = make_site({3, -1, 0, 7, 2});
    CHECK(site_from_json(site_to_json(x, 5)) == x);

    EnvParams p;
    p.seed = 99;
    p.dim = 3;
    CHECK(env_params_from_json(to_json(p)) == p);
    p.table = InverseCdfTable{{0.1, 0.5, 1.0}, {100.0, 4.0, 1.0}};
    CHECK(env_params_from_json(to_json(p)) == p);

    for (auto spec : {DynamicsSpec::bouchaud(0.3), DynamicsSpec::metropolis(), DynamicsSpec::heat_bath()}) {
      CHECK(dynamics_from_json(to_json(spec)) == spec);
    }

    const Site y = make_site({3, -1, 7});
    const EnvWindow w = Environment(p).window(y, 1, true);
    const EnvWindow back = env_window_from_json(to_json(w));
    CHECK(back.masked());
    CHECK(back.center() == y);
    CHECK(back.at(Site::unit(1)) == w.at(Site::unit(1)));

    GreenEstimate g;
    g.value = 1.25;
    g.box_n = 3;
    g.lower = 1.0;
    g.upper = 2.0;
    const GreenEstimate gb = green_estimate_from_json(to_json(g));
    CHECK(gb.value == 1.25);
    CHECK(gb.upper == g.upper);

    Verdict v{"x", 1.5, 2.0, true, "note"};
    const Verdict vb = verdict_from_json(to_json(v));
    CHECK(vb.name == "x");
    CHECK(vb.pass);
  }

  TEST_CASE("path event stream round trip") {
    EnvParams p;
    p.dim = 3;
    const Environment env(p);
    WalkStreams st = WalkStreams::derived(1, 1);
    const auto w = simulate_time_changed_walk(env, DynamicsSpec::bouchaud(0.3), StopRule::steps(500), st);
    std::stringstream ss;
    write_path_jsonl(ss, w.path, env);
    const TimeChangedWalk r = read_path_jsonl(ss);
    REQUIRE(r.path.steps() == w.path.steps());
    CHECK(r.path.horizon == w.path.horizon);
    for (std::size_t k = 0; k < w.path.steps(); ++k) {
      REQUIRE(r.path.jumps[k].time == w.path.jumps[k].time);
      REQUIRE(r.path.jumps[k].site == w.path.jumps[k].site);
    }
    CHECK(r.clock.total() == doctest::Approx(w.clock.total()).epsilon(1e-12));
  }
}
