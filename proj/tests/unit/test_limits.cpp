#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "trapkit/limits.hpp"
#include "trapkit/stats.hpp"
#include "trapkit/summary.hpp"

using namespace trapkit;

namespace {

LimitParams params_with_pool(double delta) {
  std::vector<double> pool;
  RngStream rng(17);
  for (int k = 0; k < 500; ++k) pool.push_back(0.15 + 0.1 * rng.uniform());
  LimitParams p;
  p.alpha = 0.5;
  p.delta = delta;
  p.c_hat = 300.0;
  p.greenbar_sampler = std::make_shared<TiltedGreenbarSampler>(pool);
  // Matches c E_tilt[G^alpha], so psi_delta tends to psi as delta -> 0.
  p.greenbar_moment = p.c_hat * p.greenbar_sampler->tilted_mean([](double g) { return std::sqrt(g); });
  return p;
}

}  // namespace

TEST_SUITE("limits") {
  TEST_CASE("trap depth law") {
    CHECK(trap_depth_from_uniform(1.0, 2.0, 0.5) == 2.0);
    CHECK(trap_depth_from_uniform(0.25, 1.0, 0.5) == doctest::Approx(16.0));
    CHECK(trap_depth_cdf(2.0, 2.0, 0.5) == 0.0);
    CHECK(trap_depth_cdf(8.0, 2.0, 0.5) == doctest::Approx(0.5));
    RngStream rng(1);
    std::vector<double> xs;
    for (int k = 0; k < 20000; ++k) xs.push_back(sample_trap_depth(0.5, 0.5, rng));
    CHECK(ks_test(xs, [](double x) { return x < 0.5 ? 0.0 : trap_depth_cdf(x, 0.5, 0.5); }).pass);
  }

  TEST_CASE("poisson times") {
    RngStream rng(2);
    EmpiricalSummary counts;
    for (int k = 0; k < 2000; ++k) {
      const auto ts = sample_poisson_times(3.0, 2.0, rng);
      for (std::size_t i = 0; i < ts.size(); ++i) {
        REQUIRE(ts[i] >= 0.0);
        REQUIRE(ts[i] <= 2.0);
        if (i) REQUIRE(ts[i] > ts[i - 1]);
      }
      counts.add(static_cast<double>(ts.size()));
    }
    CHECK(std::abs(counts.mean() - 6.0) <= 4.0 * counts.std_error());
    std::vector<double> c = counts.samples();
    CHECK(dispersion_test(c).pass);
  }

  TEST_CASE("tilted sampler on a two-point pool") {
    const TiltedGreenbarSampler s({1.0, 2.0});
    CHECK(s.c_estimate() == doctest::Approx(0.75));
    CHECK(s.tilted_mean([](double g) { return g; }) == doctest::Approx(4.0 / 3.0));
    RngStream rng(3);
    int ones = 0;
    const int n = 30000;
    for (int k = 0; k < n; ++k) ones += s.sample(rng) == 1.0;
    CHECK(std::abs(ones / double(n) - 2.0 / 3.0) <= 4.0 * std::sqrt(2.0 / 9.0 / n));
  }

  TEST_CASE("closed-form psi") {
    // Gamma(3/2) Gamma(1/2) = pi / 2.
    CHECK(psi(1.0, 0.5, 1.0) == doctest::Approx(std::numbers::pi / 2));
    CHECK(psi(4.0, 0.5, 2.0) == doctest::Approx(2.0 * std::numbers::pi));
    for (double l : {0.1, 0.5, 1.0, 2.0, 10.0}) {
      for (double a : {0.3, 0.5, 0.8}) {
        CHECK(psi_by_quadrature(l, a, 1.7) == doctest::Approx(psi(l, a, 1.7)).epsilon(1e-6));
      }
    }
  }

  TEST_CASE("psi_delta: Monte Carlo vs exact, and the delta trend") {
    RngStream rng(4);
    double prev = 0.0;
    for (double delta : {1.0, 0.5, 0.25, 0.0625}) {
      const LimitParams p = params_with_pool(delta);
      const double exact = psi_delta_exact(1.0, p);
      const McValue mc = psi_delta(1.0, p, 40000, rng);
      CHECK(std::abs(mc.value - exact) <= 4.0 * mc.std_error);
      CHECK(exact > prev);
      CHECK(exact < psi(1.0, 0.5, p.greenbar_moment));
      prev = exact;
    }
    const LimitParams tiny = params_with_pool(1e-8);
    CHECK(psi_delta_exact(1.0, tiny) == doctest::Approx(psi(1.0, 0.5, tiny.greenbar_moment)).epsilon(1e-2));
  }

  TEST_CASE("H_delta jump counts") {
    const LimitParams p = params_with_pool(1.0);
    RngStream rng(5);
    EmpiricalSummary n;
    for (int k = 0; k < 500; ++k) {
      const StepPath h = sample_H_delta_path(p, 0.1, rng);
      for (double s : h.sizes) REQUIRE(s > 0.0);
      n.add(static_cast<double>(h.times.size()));
      double total = 0.0;
      for (double x : h.sizes) total += x;
      CHECK(h.value_at(0.1) == doctest::Approx(total));
    }
    CHECK(std::abs(n.mean() - 30.0) <= 4.0 * n.std_error());
  }

  TEST_CASE("positive stable Laplace transform") {
    RngStream rng(6);
    std::vector<double> s;
    for (int k = 0; k < 50000; ++k) s.push_back(positive_stable(0.5, rng));
    for (double l : {0.25, 1.0, 4.0}) {
      RngStream b(7);
      const LaplaceEstimate e = empirical_laplace_exponent(s, l, 1.0, b, 100);
      CHECK(std::abs(e.psi - std::sqrt(l)) <= 4.0 * e.std_error + 1e-3);
    }
    for (double x : s) REQUIRE(x > 0.0);
  }

  TEST_CASE("stable subordinator") {
    const std::vector<double> grid{0.0, 0.5, 1.0, 2.0};
    RngStream rng(8);
    std::vector<double> h1, h2;
    for (int k = 0; k < 20000; ++k) {
      const GridPath g = sample_stable_subordinator(0.5, 2.0, grid, rng);
      REQUIRE(g.v.front() == 0.0);
      for (std::size_t i = 1; i < g.v.size(); ++i) REQUIRE(g.v[i] >= g.v[i - 1]);
      h1.push_back(g.v[2]);
      h2.push_back(g.v[3] / 4.0);  // H(2) has the law of 2^{1/alpha} H(1)
    }
    CHECK(ks_two_sample(h1, h2).pass);
    RngStream b(9);
    const LaplaceEstimate e = empirical_laplace_exponent(h1, 1.0, 1.0, b, 100);
    CHECK(std::abs(e.psi - 2.0) <= 4.0 * e.std_error + 1e-3);
  }

  TEST_CASE("grid paths and fractional kinetics") {
    GridPath g{{0.0, 1.0, 2.0}, {0.0, 2.0, 3.0}};
    CHECK(g.value_at(0.5) == doctest::Approx(1.0));
    CHECK(g.value_at(2.0) == doctest::Approx(3.0));
    CHECK_THROWS(g.value_at(2.5));
    // H(s) = s, so H^{-1}(t) = t and the process is B itself.
    const GridPath bm{{0.0, 1.0, 2.0, 3.0}, {0.0, 1.0, -1.0, 0.5}};
    const MonotonePath h = MonotonePath::linear(3.0);
    CHECK(fractional_kinetics_eval(bm, h, 1.5) == doctest::Approx(0.0));
    CHECK_THROWS_AS(fractional_kinetics_eval(bm, h, 3.5), std::out_of_range);

    RngStream rng(10);
    std::vector<double> grid;
    for (int i = 0; i <= 100; ++i) grid.push_back(i / 100.0);
    EmpiricalSummary end;
    for (int k = 0; k < 4000; ++k) {
      const GridPath b = sample_brownian(grid, rng);
      REQUIRE(b.v.front() == 0.0);
      end.add(b.v.back() * b.v.back());
    }
    CHECK(std::abs(end.mean() - 1.0) <= 4.0 * end.std_error());
  }

  TEST_CASE("parameter validation") {
    LimitParams p = params_with_pool(1.0);
    CHECK_NOTHROW(p.validate());
    p.delta = 0.0;
    CHECK_THROWS(p.validate());
    p.delta = 1.0;
    p.c_hat = -1.0;
    CHECK_THROWS(p.validate());
    p.c_hat = 1.0;
    p.alpha = 1.0;
    CHECK_THROWS(p.validate());
  }
}
