#include <doctest.h>

#include <cmath>
#include <vector>

#include "trapkit/env.hpp"
#include "trapkit/rng.hpp"
#include "trapkit/stats.hpp"

using namespace trapkit;

namespace {

Site random_site(RngStream& rng, int dim, int spread = 1000) {
  Site s;
  for (int i = 0; i < dim; ++i) s[i] = static_cast<std::int32_t>(rng.index(2 * spread + 1)) - spread;
  return s;
}

}  // namespace

TEST_SUITE("env") {
  TEST_CASE("inverse cdf boundary values") {
    CHECK(pareto_depth(1.0, 0.5) == 1.0);
    CHECK(pareto_depth(0.25, 0.5) == doctest::Approx(16.0).epsilon(1e-15));
  }

  TEST_CASE("unit_from_bits never returns zero") {
    CHECK(unit_from_bits(0) > 0.0);
    CHECK(unit_from_bits(~0ULL) == 1.0);
  }

  TEST_CASE("params validation") {
    EnvParams p;
    p.alpha = 1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.alpha = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.alpha = 0.5;
    p.dim = 0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.dim = 5;
    CHECK_NOTHROW(p.validate());
  }

  TEST_CASE("depths are reproducible and at least one") {
    EnvParams p;
    p.seed = 42;
    const Environment a(p), b(p);
    RngStream rng(1);
    std::vector<Site> probes;
    for (int k = 0; k < 500; ++k) probes.push_back(random_site(rng, 5));
    std::vector<double> forward;
    for (const Site& s : probes) forward.push_back(a.tau_at(s));
    for (std::size_t k = probes.size(); k-- > 0;) {
      CHECK(b.tau_at(probes[k]) == forward[k]);
      CHECK(forward[k] >= 1.0);
    }
  }

  TEST_CASE("different seeds give different fields") {
    EnvParams p;
    p.seed = 1;
    const Environment a(p);
    p.seed = 2;
    const Environment b(p);
    int same = 0;
    for (int i = 0; i < 100; ++i) same += a.tau_at(Site::unit(0, 1) + Site::unit(1, i)) == b.tau_at(Site::unit(0, 1) + Site::unit(1, i));
    CHECK(same == 0);
  }

  TEST_CASE("exact Pareto law: KS and tail frequencies") {
    EnvParams p;
    p.alpha = 0.5;
    p.dim = 3;
    p.seed = 7;
    const Environment env(p);
    std::vector<double> v;
    const int n = 100000;
    for (int i = 0; i < n; ++i) v.push_back(env.tau_at(make_site({i, 3, -i})));
    const KsResult ks = ks_test(v, [](double y) { return y < 1.0 ? 0.0 : 1.0 - std::pow(y, -0.5); });
    CHECK(ks.statistic < 1.36 / std::sqrt(static_cast<double>(n)));
    for (double y : {1.0, 2.0, 10.0, 100.0}) {
      double hits = 0;
      for (double t : v) hits += t >= y;
      const double pr = std::pow(y, -0.5);
      const double se = std::sqrt(pr * (1 - pr) / n);
      CHECK(std::abs(hits / n - pr) <= 4 * se + 1e-12);
    }
  }

  TEST_CASE("neighbouring depths are uncorrelated") {
    EnvParams p;
    p.seed = 9;
    const Environment env(p);
    std::vector<double> x, y;
    const int n = 40000;
    for (int i = 0; i < n; ++i) {
      const Site s = make_site({i, 0, 0, 0, 0});
      x.push_back(env.tau_at(s) >= 2.0);
      y.push_back(env.tau_at(neighbour(s, 2)) >= 2.0);
    }
    CHECK(std::abs(pearson_correlation(x, y)) < 4.0 / std::sqrt(static_cast<double>(n)));
  }

  TEST_CASE("translations") {
    EnvParams p;
    p.seed = 3;
    const Environment env(p);
    RngStream rng(5);
    CHECK(env.translated(Site::origin()).tau_at(make_site({1, 2, 3})) == env.tau_at(make_site({1, 2, 3})));
    for (int k = 0; k < 100; ++k) {
      const Site x = random_site(rng, 5), y = random_site(rng, 5);
      const Environment t = env.translated(x);
      CHECK(t.tau_at(Site::origin()) == env.tau_at(x));
      CHECK(t.tau_at(y) == env.tau_at(x + y));
      CHECK(t.translated(-x).tau_at(y) == env.tau_at(y));
    }
  }

  TEST_CASE("windows") {
    EnvParams p;
    p.dim = 2;
    p.seed = 11;
    const Environment env(p);
    const Site c = make_site({4, -7});
    const EnvWindow w = env.window(c, 1, true);
    CHECK(w.size() == 8);
    CHECK(w.volume() == 9);
    CHECK_THROWS(w.at(Site::origin()));
    CHECK_THROWS(w.at(make_site({2, 0})));
    for (std::size_t i = 0; i < w.volume(); ++i) {
      const Site off = w.offset_of(i);
      if (off == Site::origin()) continue;
      CHECK(w.at(off) == env.tau_at(c + off));
    }
    const EnvWindow shifted = env.translated(c).window(Site::origin(), 1, true);
    for (std::size_t i = 0; i < w.volume(); ++i) {
      const Site off = w.offset_of(i);
      if (off != Site::origin()) CHECK(shifted.at(off) == w.at(off));
    }
    CHECK(w.with_center(5.0).at(Site::origin()) == 5.0);
    CHECK(env.window(c, 3, false).shrunk(1).at(make_site({1, 1})) == env.tau_at(c + make_site({1, 1})));
  }

  TEST_CASE("inverse cdf table") {
    const InverseCdfTable t = InverseCdfTable::constant(3.0);
    CHECK(t(0.5, 0.5) == 3.0);
    EnvParams p;
    p.table = t;
    p.dim = 1;
    const Environment env(p);
    CHECK(env.tau_at(make_site({17})) == 3.0);
    InverseCdfTable bad;
    bad.u = {0.5, 1.0};
    bad.tau = {0.5, 1.0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  }
}
