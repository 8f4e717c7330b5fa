#include "trapkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

#include "trapkit/summary.hpp"

namespace trapkit {

double ks_critical_value(double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must lie in (0, 1)");
  if (level == 0.10) return 1.22;
  if (level == 0.05) return 1.36;
  if (level == 0.01) return 1.63;
  return std::sqrt(-0.5 * std::log(level / 2.0));
}

double kolmogorov_pvalue(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 1.18) {
    // Small-x form: P[K <= x] = sqrt(2 pi)/x sum exp(-(2k-1)^2 pi^2 / (8 x^2)).
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double s = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double j = 2.0 * k - 1.0;
      s += std::exp(-j * j * pi2 / (8.0 * x * x));
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / x * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf, double level) {
  if (samples.empty()) throw std::invalid_argument("KS test on an empty sample");
  if (samples.size() < 20) throw std::invalid_argument("KS test needs n >= 20");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  KsResult r;
  r.statistic = d;
  r.n = samples.size();
  r.threshold = ks_critical_value(level) / std::sqrt(n);
  r.p_value = kolmogorov_pvalue(std::sqrt(n) * d);
  r.pass = d <= r.threshold;
  return r;
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b, double level) {
  if (a.empty() || b.empty()) throw std::invalid_argument("two-sample KS on an empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double n = static_cast<double>(a.size());
  const double m = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  KsResult r;
  r.statistic = d;
  r.n = a.size() + b.size();
  const double scale = std::sqrt((n + m) / (n * m));
  r.threshold = ks_critical_value(level) * scale;
  r.p_value = kolmogorov_pvalue(d / scale);
  r.pass = d <= r.threshold;
  return r;
}

DispersionResult dispersion_test(const std::vector<double>& counts, double level) {
  if (counts.size() < 30) throw std::invalid_argument("dispersion test needs >= 30 counts");
  DispersionResult r;
  r.n = counts.size();
  r.mean = mean_of(counts);
  if (!(r.mean > 0.0)) throw std::invalid_argument("dispersion test needs a positive mean");
  r.index = variance_of(counts) / r.mean;
  const double dof = static_cast<double>(counts.size() - 1);
  const boost::math::chi_squared chi(dof);
  r.lower = boost::math::quantile(chi, level / 2.0) / dof;
  r.upper = boost::math::quantile(chi, 1.0 - level / 2.0) / dof;
  r.pass = r.index >= r.lower && r.index <= r.upper;
  return r;
}

HillResult hill_alpha(const std::vector<double>& samples, std::size_t k) {
  if (k < 10) throw std::invalid_argument("Hill estimator needs k >= 10");
  if (k >= samples.size()) throw std::invalid_argument("Hill estimator needs k < n");
  for (double x : samples) {
    if (!(x > 0.0)) throw std::invalid_argument("Hill estimator needs positive samples");
  }
  std::vector<double> v = samples;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end(), std::greater<>());
  const double threshold = v[k];
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += std::log(v[i] / threshold);
  HillResult r;
  r.k = k;
  r.alpha = static_cast<double>(k) / s;
  const double half = 1.96 / std::sqrt(static_cast<double>(k));
  r.lower = r.alpha * (1.0 - half);
  r.upper = r.alpha * (1.0 + half);
  return r;
}

HillDrift hill_drift(const std::vector<double>& samples, const std::vector<std::size_t>& ks) {
  if (ks.size() < 2) throw std::invalid_argument("Hill drift needs at least two k values");
  HillDrift d;
  std::vector<double> lx, ly;
  for (std::size_t k : ks) {
    d.estimates.push_back(hill_alpha(samples, k));
    lx.push_back(std::log(static_cast<double>(k)));
    ly.push_back(d.estimates.back().alpha);
  }
  d.slope = linear_fit(lx, ly).slope;
  const auto lo = std::min_element(ks.begin(), ks.end()) - ks.begin();
  const auto hi = std::max_element(ks.begin(), ks.end()) - ks.begin();
  const HillResult& a = d.estimates[static_cast<std::size_t>(lo)];
  const HillResult& b = d.estimates[static_cast<std::size_t>(hi)];
  d.drifting = a.upper < b.lower || b.upper < a.lower;
  return d;
}

LaplaceEstimate empirical_laplace_exponent(const std::vector<double>& values, double lambda, double t,
                                           RngStream& rng, std::size_t resamples) {
  if (!(t > 0.0)) throw std::invalid_argument("Laplace exponent needs t > 0");
  if (values.size() < 100) throw std::invalid_argument("Laplace exponent needs n >= 100");
  std::vector<double> e(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) e[i] = std::exp(-lambda * values[i]);
  auto stat = [&](const std::vector<std::size_t>& idx) {
    double s = 0.0;
    for (auto i : idx) s += e[i];
    const double m = s / static_cast<double>(idx.size());
    if (!(m > 0.0)) return std::numeric_limits<double>::infinity();
    return -std::log(m) / t;
  };
  const auto b = bootstrap_indices(values.size(), stat, rng, {resamples, 0.95});
  if (!std::isfinite(b.estimate)) throw std::domain_error("empirical Laplace transform underflowed to 0");
  LaplaceEstimate r;
  r.psi = b.estimate;
  r.std_error = std::isfinite(b.std_error) ? b.std_error : std::numeric_limits<double>::infinity();
  r.n = values.size();
  return r;
}

namespace {

std::vector<GraphPoint> refine(const std::vector<GraphPoint>& pts, double h) {
  std::vector<GraphPoint> out{pts.front()};
  for (std::size_t k = 1; k < pts.size(); ++k) {
    const GraphPoint& a = pts[k - 1];
    const GraphPoint& b = pts[k];
    const double len = (b.t - a.t) + (b.v - a.v);
    const auto pieces = static_cast<std::size_t>(std::ceil(len / h));
    for (std::size_t j = 1; j < pieces; ++j) {
      const double w = static_cast<double>(j) / static_cast<double>(pieces);
      out.push_back({a.t + w * (b.t - a.t), a.v + w * (b.v - a.v)});
    }
    out.push_back(b);
  }
  return out;
}

double arclength(const std::vector<GraphPoint>& pts) {
  double s = 0.0;
  for (std::size_t k = 1; k < pts.size(); ++k) s += (pts[k].t - pts[k - 1].t) + (pts[k].v - pts[k - 1].v);
  return s;
}

double discrete_frechet(const std::vector<GraphPoint>& p, const std::vector<GraphPoint>& q) {
  auto dist = [](const GraphPoint& a, const GraphPoint& b) {
    return std::max(std::abs(a.t - b.t), std::abs(a.v - b.v));
  };
  std::vector<double> prev(q.size()), cur(q.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < q.size(); ++j) {
      const double d = dist(p[i], q[j]);
      double best;
      if (i == 0 && j == 0) {
        best = d;
      } else if (i == 0) {
        best = std::max(cur[j - 1], d);
      } else if (j == 0) {
        best = std::max(prev[j], d);
      } else {
        best = std::max(std::min({prev[j], prev[j - 1], cur[j - 1]}), d);
      }
      cur[j] = best;
    }
    std::swap(prev, cur);
  }
  return prev.back();
}

}  // namespace

double m1_distance(const MonotonePath& f, const MonotonePath& g, double t, std::size_t refinement) {
  if (!(t > 0.0)) throw std::invalid_argument("M1 distance needs t > 0");
  if (refinement < 2) throw std::invalid_argument("M1 refinement must be >= 2");
  const MonotonePath fr = f.restricted(t);
  const MonotonePath gr = g.restricted(t);
  const double sup = sup_distance(fr, gr, t);
  if (sup == 0.0) return 0.0;
  const double len = std::max(arclength(fr.points()), arclength(gr.points()));
  const double h = len / static_cast<double>(refinement);
  const double dp = discrete_frechet(refine(fr.points(), h), refine(gr.points(), h));
  return std::min(dp, sup);
}

namespace {

std::vector<double> centered_distances(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> a(n * n);
  std::vector<double> row(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double d = std::abs(x[i] - x[j]);
      a[i * n + j] = d;
      row[i] += d;
    }
    total += row[i];
  }
  const double nn = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) row[i] /= nn;
  total /= nn * nn;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] += total - row[i] - row[j];
  }
  return a;
}

double frob(const std::vector<double>& a, const std::vector<double>& b, std::size_t n,
            const std::vector<std::size_t>& perm) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t pi = perm[i];
    for (std::size_t j = 0; j < n; ++j) s += a[i * n + j] * b[pi * n + perm[j]];
  }
  return s;
}

}  // namespace

double distance_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("distance correlation needs paired samples");
  const std::size_t n = x.size();
  const auto a = centered_distances(x);
  const auto b = centered_distances(y);
  std::vector<std::size_t> id(n);
  std::iota(id.begin(), id.end(), std::size_t{0});
  const double vxy = frob(a, b, n, id);
  const double vxx = frob(a, a, n, id);
  const double vyy = frob(b, b, n, id);
  if (!(vxx > 0.0) || !(vyy > 0.0)) throw std::invalid_argument("distance correlation of a constant marginal");
  return std::sqrt(std::max(0.0, vxy) / std::sqrt(vxx * vyy));
}

IndependenceResult independence_statistic(const std::vector<double>& x, const std::vector<double>& y,
                                          RngStream& rng, std::size_t permutations) {
  if (x.size() != y.size()) throw std::invalid_argument("independence test needs paired samples");
  if (x.size() < 100) throw std::invalid_argument("independence test needs n >= 100");
  const std::size_t n = x.size();
  const auto a = centered_distances(x);
  const auto b = centered_distances(y);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  const double vxx = frob(a, a, n, perm);
  const double vyy = frob(b, b, n, perm);
  if (!(vxx > 0.0) || !(vyy > 0.0)) throw std::invalid_argument("independence test with a constant marginal");
  const double obs = frob(a, b, n, perm);
  std::size_t exceed = 0;
  for (std::size_t p = 0; p < permutations; ++p) {
    std::shuffle(perm.begin(), perm.end(), rng.engine());
    if (frob(a, b, n, perm) >= obs) ++exceed;
  }
  IndependenceResult r;
  r.dcor = std::sqrt(std::max(0.0, obs) / std::sqrt(vxx * vyy));
  r.permutations = permutations;
  r.p_value = (1.0 + static_cast<double>(exceed)) / (1.0 + static_cast<double>(permutations));
  return r;
}

double pearson_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("correlation needs paired samples");
  const double mx = mean_of(x), my = mean_of(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double autocorrelation(const std::vector<double>& x, std::size_t lag) {
  if (lag >= x.size()) throw std::invalid_argument("lag exceeds the sample length");
  const double m = mean_of(x);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    den += (x[i] - m) * (x[i] - m);
    if (i + lag < x.size()) num += (x[i] - m) * (x[i + lag] - m);
  }
  if (den == 0.0) return 0.0;
  return num / den;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("linear fit needs >= 2 points");
  const double n = static_cast<double>(x.size());
  const double mx = mean_of(x), my = mean_of(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("linear fit with constant x");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (x.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      rss += r * r;
    }
    f.slope_se = std::sqrt(rss / (n - 2.0) / sxx);
  }
  return f;
}

}  // namespace trapkit
