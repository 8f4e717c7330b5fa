#include <doctest.h>

#include <cmath>
#include <vector>

#include "trapkit/paths.hpp"
#include "trapkit/rng.hpp"
#include "trapkit/stats.hpp"

using namespace trapkit;

namespace {

std::vector<double> uniforms(std::size_t n, std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform();
  return v;
}

std::vector<double> poisson_counts(std::size_t n, double mean, std::uint64_t seed) {
  RngStream rng(seed);
  std::poisson_distribution<int> pois(mean);
  std::vector<double> v(n);
  for (double& x : v) x = pois(rng.engine());
  return v;
}

}  // namespace

TEST_SUITE("stats") {
  TEST_CASE("KS critical values and p-values") {
    CHECK(ks_critical_value(0.05) == doctest::Approx(1.36));
    CHECK(ks_critical_value(0.10) == doctest::Approx(1.22));
    CHECK(ks_critical_value(0.01) == doctest::Approx(1.63));
    CHECK(kolmogorov_pvalue(1.36) == doctest::Approx(0.049).epsilon(0.05));
    CHECK(kolmogorov_pvalue(0.0) == doctest::Approx(1.0));
    CHECK(kolmogorov_pvalue(3.0) < 1e-6);
  }

  TEST_CASE("one-sample KS") {
    const auto u = uniforms(5000, 1);
    const KsResult ok = ks_test(u, [](double x) { return std::clamp(x, 0.0, 1.0); });
    CHECK(ok.pass);
    CHECK(ok.n == 5000);
    CHECK(ok.threshold == doctest::Approx(1.36 / std::sqrt(5000.0)));
    const KsResult bad = ks_test(u, [](double x) { return std::clamp(x * x, 0.0, 1.0); });
    CHECK_FALSE(bad.pass);
    CHECK(bad.statistic == doctest::Approx(0.25).epsilon(0.05));
    CHECK_THROWS(ks_test(std::vector<double>(5, 0.5), [](double x) { return x; }));
  }

  TEST_CASE("two-sample KS") {
    CHECK(ks_two_sample(uniforms(3000, 2), uniforms(2000, 3)).pass);
    auto shifted = uniforms(2000, 4);
    for (double& x : shifted) x += 0.1;
    CHECK_FALSE(ks_two_sample(uniforms(3000, 2), shifted).pass);
  }

  TEST_CASE("dispersion") {
    const DispersionResult p = dispersion_test(poisson_counts(2000, 4.0, 5));
    CHECK(p.pass);
    CHECK(p.index == doctest::Approx(1.0).epsilon(0.1));
    CHECK(p.lower < 1.0);
    CHECK(p.upper > 1.0);
    std::vector<double> over = poisson_counts(1000, 4.0, 6);
    const auto more = poisson_counts(1000, 12.0, 7);
    over.insert(over.end(), more.begin(), more.end());
    CHECK_FALSE(dispersion_test(over).pass);
    CHECK_THROWS(dispersion_test(std::vector<double>(10, 1.0)));
  }

  TEST_CASE("Hill estimator") {
    RngStream rng(8);
    std::vector<double> pareto(50000);
    for (double& x : pareto) x = std::pow(rng.uniform(), -2.0);
    const HillResult h = hill_alpha(pareto, 2000);
    CHECK(h.lower <= 0.5);
    CHECK(h.upper >= 0.5);
    const HillDrift stable = hill_drift(pareto, {200, 1000, 5000});
    CHECK_FALSE(stable.drifting);
    std::vector<double> expo(50000);
    for (double& x : expo) x = 1.0 + rng.exponential();
    CHECK(hill_drift(expo, {100, 1000, 10000}).drifting);
  }

  TEST_CASE("empirical Laplace exponent") {
    RngStream rng(9);
    const LaplaceEstimate c = empirical_laplace_exponent(std::vector<double>(100, 2.0), 0.5, 4.0, rng);
    CHECK(c.psi == doctest::Approx(0.25));
    CHECK(c.std_error == doctest::Approx(0.0));
    std::vector<double> ex(20000);
    for (double& x : ex) x = rng.exponential();
    // E exp(-E) = 1/2.
    const LaplaceEstimate e = empirical_laplace_exponent(ex, 1.0, 1.0, rng, 200);
    CHECK(std::abs(e.psi - std::log(2.0)) <= 4.0 * e.std_error);
  }

  TEST_CASE("M1 distance") {
    const MonotonePath a = MonotonePath::step(1.0, 1.0, 3.0);
    CHECK(m1_distance(a, a, 3.0) == doctest::Approx(0.0).epsilon(1e-12));
    const MonotonePath b = MonotonePath::step(1.05, 1.0, 3.0);
    CHECK(sup_distance(a, b, 3.0) == doctest::Approx(1.0));
    CHECK(m1_distance(a, b, 3.0) <= 0.06);
    const MonotonePath ramp({{0.0, 0.0}, {1.0, 0.0}, {1.02, 1.0}, {3.0, 1.0}});
    CHECK(m1_distance(a, ramp, 3.0) <= 0.03);
    const MonotonePath high = MonotonePath::step(1.0, 2.0, 3.0);
    CHECK(m1_distance(a, high, 3.0) == doctest::Approx(1.0).epsilon(0.02));
    for (double h : {0.0, 0.3, 1.0}) {
      const MonotonePath c = MonotonePath::step(1.0 + h, 1.5, 3.0);
      CHECK(m1_distance(a, c, 3.0) <= sup_distance(a, c, 3.0) + 1e-12);
    }
  }

  TEST_CASE("dependence measures") {
    const auto x = uniforms(500, 10), y = uniforms(500, 11);
    std::vector<double> sq(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) sq[i] = (x[i] - 0.5) * (x[i] - 0.5);
    CHECK(distance_correlation(x, x) == doctest::Approx(1.0));
    CHECK(distance_correlation(x, y) < 0.15);
    CHECK(distance_correlation(x, sq) > 0.3);
    CHECK(std::abs(pearson_correlation(x, sq)) < 0.15);
    RngStream rng(12);
    CHECK(independence_statistic(x, y, rng).p_value > 0.01);
    CHECK(independence_statistic(x, sq, rng).p_value < 0.01);
  }

  TEST_CASE("autocorrelation and linear fits") {
    std::vector<double> alt(1000);
    for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2 ? 1.0 : -1.0;
    CHECK(autocorrelation(alt, 1) == doctest::Approx(-1.0).epsilon(1e-2));
    CHECK(autocorrelation(alt, 2) == doctest::Approx(1.0).epsilon(1e-2));
    const LinearFit f = linear_fit({0, 1, 2, 3}, {1, 3, 5, 7});
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(f.slope_se == doctest::Approx(0.0));
  }
}
