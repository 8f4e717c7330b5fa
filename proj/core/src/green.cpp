#include "trapkit/green.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <utility>

#include "trapkit/summary.hpp"

namespace trapkit {

std::string to_string(GreenMethod m) {
  switch (m) {
    case GreenMethod::LinearSolve: return "linear-solve";
    case GreenMethod::MonteCarlo: return "monte-carlo";
    case GreenMethod::SrwReference: return "srw-reference";
  }
  return "unknown";
}

GreenMethod green_method_from_string(const std::string& name) {
  if (name == "linear-solve") return GreenMethod::LinearSolve;
  if (name == "monte-carlo") return GreenMethod::MonteCarlo;
  if (name == "srw-reference") return GreenMethod::SrwReference;
  throw std::invalid_argument("unknown green method '" + name + "'");
}

namespace {

// The killed operator -L on B_n, stored as per-node conductances to the 2d
// neighbours (edges leaving the box included; they only feed the diagonal).
struct BoxSystem {
  int d = 1;
  int n = 1;
  std::size_t N = 0;
  std::vector<std::size_t> stride;
  std::vector<double> cond;  // N * 2d
  std::vector<double> diag;
  std::size_t center = 0;

  std::size_t dirs() const { return static_cast<std::size_t>(2 * d); }
};

void check_window(const EnvWindow& w, int n) {
  if (n < 1) throw std::invalid_argument("box radius n must be >= 1");
  if (w.radius() < n + 1) {
    throw std::invalid_argument("window radius " + std::to_string(w.radius()) +
                                " too small for box n = " + std::to_string(n) + " (needs n + 1)");
  }
}

// Iterates the box {-n..n}^d in index order (coordinate 0 fastest), calling
// fn(node index, offset, window index).
template <class Fn>
void for_each_node(const EnvWindow& w, int n, Fn&& fn) {
  const int d = w.dim();
  const int R = w.radius();
  const std::size_t W = static_cast<std::size_t>(2 * R + 1);
  std::vector<std::size_t> wstride(static_cast<std::size_t>(d));
  std::size_t s = 1;
  for (int i = 0; i < d; ++i) {
    wstride[static_cast<std::size_t>(i)] = s;
    s *= W;
  }
  Site off;
  for (int i = 0; i < d; ++i) off[i] = -n;
  const std::size_t N = box_volume(d, n);
  for (std::size_t k = 0; k < N; ++k) {
    std::size_t widx = 0;
    for (int i = 0; i < d; ++i) widx += static_cast<std::size_t>(off[i] + R) * wstride[static_cast<std::size_t>(i)];
    fn(k, off, widx, wstride);
    for (int i = 0; i < d; ++i) {
      if (++off[i] <= n) break;
      off[i] = -n;
    }
  }
}

BoxSystem build_system(const EnvWindow& w, int n, const DynamicsSpec& spec) {
  check_window(w, n);
  BoxSystem sys;
  sys.d = w.dim();
  sys.n = n;
  sys.N = box_volume(sys.d, n);
  sys.stride.resize(static_cast<std::size_t>(sys.d));
  std::size_t s = 1;
  for (int i = 0; i < sys.d; ++i) {
    sys.stride[static_cast<std::size_t>(i)] = s;
    s *= static_cast<std::size_t>(2 * n + 1);
  }
  const std::size_t nd = sys.dirs();
  sys.cond.assign(sys.N * nd, 0.0);
  sys.diag.assign(sys.N, 0.0);
  const auto& raw = w.raw();
  sys.center = 0;
  for_each_node(w, n, [&](std::size_t k, const Site& off, std::size_t widx,
                          const std::vector<std::size_t>& wstride) {
    if (off == Site::origin()) sys.center = k;
    const double tx = raw[widx];
    double total = 0.0;
    for (int dir = 0; dir < sys.d * 2; ++dir) {
      const std::size_t st = wstride[static_cast<std::size_t>(dir / 2)];
      const std::size_t nb = dir % 2 == 0 ? widx + st : widx - st;
      const double cxy = edge_conductance(tx, raw[nb], spec);
      sys.cond[k * nd + static_cast<std::size_t>(dir)] = cxy;
      total += cxy;
    }
    sys.diag[k] = total;
  });
  return sys;
}

// Neighbour index inside the box, or npos when the edge leaves B_n.
struct Neighbours {
  const BoxSystem& sys;
  std::vector<int> coord;

  explicit Neighbours(const BoxSystem& s) : sys(s), coord(static_cast<std::size_t>(s.d), -s.n) {}
  void advance() {
    for (int i = 0; i < sys.d; ++i) {
      auto& c = coord[static_cast<std::size_t>(i)];
      if (++c <= sys.n) break;
      c = -sys.n;
    }
  }
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t at(std::size_t k, int dir) const {
    const int axis = dir / 2;
    const int c = coord[static_cast<std::size_t>(axis)];
    const std::size_t st = sys.stride[static_cast<std::size_t>(axis)];
    if (dir % 2 == 0) return c < sys.n ? k + st : npos;
    return c > -sys.n ? k - st : npos;
  }
};

// Precomputed neighbour table: N * 2d entries, npos for edges leaving B_n.
std::vector<std::size_t> neighbour_table(const BoxSystem& sys) {
  std::vector<std::size_t> tab(sys.N * sys.dirs());
  Neighbours nb(sys);
  for (std::size_t k = 0; k < sys.N; ++k) {
    for (int dir = 0; dir < 2 * sys.d; ++dir) tab[k * sys.dirs() + static_cast<std::size_t>(dir)] = nb.at(k, dir);
    nb.advance();
  }
  return tab;
}

struct Solution {
  std::vector<double> f;  // full box, fixed nodes carry their boundary value
  double residual = 0.0;
  int iterations = 0;
};

// Solves the Dirichlet problem: on free nodes sum_y c(x,y) (f(x) - f(y)) = src(x),
// f = fixed value on fixed nodes, f = 0 outside B_n. Jacobi-preconditioned CG.
Solution solve_dirichlet(const BoxSystem& sys, const std::vector<std::size_t>& tab,
                         const std::vector<std::uint8_t>& fixed, const std::vector<double>& fixed_value,
                         const std::vector<double>& src, const SolverOptions& opts) {
  const std::size_t N = sys.N;
  const std::size_t nd = sys.dirs();
  std::vector<double> b(N, 0.0);
  for (std::size_t k = 0; k < N; ++k) {
    if (fixed[k]) continue;
    double v = src[k];
    for (std::size_t dir = 0; dir < nd; ++dir) {
      const std::size_t j = tab[k * nd + dir];
      if (j != Neighbours::npos && fixed[j] && fixed_value[j] != 0.0) v += sys.cond[k * nd + dir] * fixed_value[j];
    }
    b[k] = v;
  }
  auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t k = 0; k < N; ++k) {
      if (fixed[k]) {
        y[k] = 0.0;
        continue;
      }
      double v = sys.diag[k] * x[k];
      for (std::size_t dir = 0; dir < nd; ++dir) {
        const std::size_t j = tab[k * nd + dir];
        if (j != Neighbours::npos && !fixed[j]) v -= sys.cond[k * nd + dir] * x[j];
      }
      y[k] = v;
    }
  };
  auto dot = [&](const std::vector<double>& u, const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t k = 0; k < N; ++k) s += u[k] * v[k];
    return s;
  };

  Solution sol;
  std::vector<double> x(N, 0.0), r = b, z(N), p(N), q(N);
  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) {
    sol.f = x;
  } else {
    for (std::size_t k = 0; k < N; ++k) z[k] = fixed[k] ? 0.0 : r[k] / sys.diag[k];
    p = z;
    double rz = dot(r, z);
    double rel = 1.0;
    int it = 0;
    for (; it < opts.max_iter; ++it) {
      apply(p, q);
      const double pq = dot(p, q);
      if (!(pq > 0.0)) throw SolverError("conjugate gradient broke down (non-positive curvature)");
      const double step = rz / pq;
      for (std::size_t k = 0; k < N; ++k) {
        x[k] += step * p[k];
        r[k] -= step * q[k];
      }
      rel = std::sqrt(dot(r, r)) / bnorm;
      if (rel <= opts.rel_tol) {
        ++it;
        break;
      }
      for (std::size_t k = 0; k < N; ++k) z[k] = fixed[k] ? 0.0 : r[k] / sys.diag[k];
      const double rz_new = dot(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t k = 0; k < N; ++k) p[k] = z[k] + beta * p[k];
    }
    // Report the true residual rather than the recursively updated one.
    apply(x, q);
    double rr = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
      if (!fixed[k]) rr += (b[k] - q[k]) * (b[k] - q[k]);
    }
    sol.residual = std::sqrt(rr) / bnorm;
    sol.iterations = it;
    if (rel > opts.rel_tol) {
      throw SolverError("conjugate gradient did not converge: relative residual " +
                        std::to_string(sol.residual) + " after " + std::to_string(it) + " iterations");
    }
    sol.f = std::move(x);
  }
  for (std::size_t k = 0; k < N; ++k) {
    if (fixed[k]) sol.f[k] = fixed_value[k];
  }
  return sol;
}

double energy_of(const BoxSystem& sys, const std::vector<std::size_t>& tab, const std::vector<double>& f) {
  ExactSum e;
  const std::size_t nd = sys.dirs();
  for (std::size_t k = 0; k < sys.N; ++k) {
    for (std::size_t dir = 0; dir < nd; ++dir) {
      const std::size_t j = tab[k * nd + dir];
      double fj = 0.0;
      if (j != Neighbours::npos) {
        if (dir % 2 == 1) continue;  // interior edges counted once, from the lower end
        fj = f[j];
      }
      if (f[k] == fj) continue;  // keeps NaN conductances at a masked center out
      const double diff = f[k] - fj;
      e.add(sys.cond[k * nd + dir] * diff * diff);
    }
  }
  return e.value();
}

void require_unmasked(const EnvWindow& w, const char* what) {
  if (w.masked()) throw std::invalid_argument(std::string(what) + " needs the center depth (window is masked)");
}

std::vector<std::uint8_t> neighbourhood_mask(const BoxSystem& sys) {
  std::vector<std::uint8_t> fixed(sys.N, 0);
  fixed[sys.center] = 1;
  for (int i = 0; i < sys.d; ++i) {
    fixed[sys.center + sys.stride[static_cast<std::size_t>(i)]] = 1;
    fixed[sys.center - sys.stride[static_cast<std::size_t>(i)]] = 1;
  }
  return fixed;
}

double conductance_from_system(const BoxSystem& sys, Boundary boundary, const SolverOptions& opts,
                               double* residual = nullptr, int* iterations = nullptr) {
  const auto tab = neighbour_table(sys);
  std::vector<std::uint8_t> fixed;
  if (boundary == Boundary::Origin) {
    fixed.assign(sys.N, 0);
    fixed[sys.center] = 1;
  } else {
    fixed = neighbourhood_mask(sys);
  }
  std::vector<double> fv(sys.N, 0.0);
  for (std::size_t k = 0; k < sys.N; ++k) fv[k] = fixed[k] ? 1.0 : 0.0;
  const std::vector<double> src(sys.N, 0.0);
  const Solution sol = solve_dirichlet(sys, tab, fixed, fv, src, opts);
  if (residual) *residual = sol.residual;
  if (iterations) *iterations = sol.iterations;
  return energy_of(sys, tab, sol.f);
}

GreenEstimate green_value(const BoxSystem& sys, const SolverOptions& opts) {
  const auto tab = neighbour_table(sys);
  const std::vector<std::uint8_t> fixed(sys.N, 0);
  const std::vector<double> fv(sys.N, 0.0);
  std::vector<double> src(sys.N, 0.0);
  src[sys.center] = 1.0;
  const Solution sol = solve_dirichlet(sys, tab, fixed, fv, src, opts);
  GreenEstimate g;
  g.value = sol.f[sys.center];
  g.box_n = sys.n;
  g.method = GreenMethod::LinearSolve;
  g.residual = sol.residual;
  g.iterations = sol.iterations;
  return g;
}

}  // namespace

GreenEstimate solve_green_box(const EnvWindow& window, int n, const DynamicsSpec& spec,
                              const SolverOptions& opts, bool certify) {
  require_unmasked(window, "solve_green_box");
  spec.validate();
  const BoxSystem sys = build_system(window, n, spec);
  GreenEstimate g = green_value(sys, opts);
  if (certify) {
    const double gbar = 1.0 / conductance_from_system(sys, Boundary::Neighbourhood, opts);
    const double q = min_return_probability(window, spec);
    g.lower = gbar;
    g.upper = gbar / (q * q);
  }
  return g;
}

double effective_conductance(const EnvWindow& window, int n, const DynamicsSpec& spec,
                             Boundary boundary, const SolverOptions& opts) {
  if (boundary == Boundary::Origin) require_unmasked(window, "origin-mode conductance");
  spec.validate();
  return conductance_from_system(build_system(window, n, spec), boundary, opts);
}

GreenEstimate green_bar(const EnvWindow& window, int n, const DynamicsSpec& spec,
                        const SolverOptions& opts, bool certify) {
  spec.validate();
  const BoxSystem sys = build_system(window, n, spec);
  GreenEstimate g;
  g.box_n = n;
  g.method = GreenMethod::LinearSolve;
  g.value = 1.0 / conductance_from_system(sys, Boundary::Neighbourhood, opts, &g.residual, &g.iterations);
  if (certify && !window.masked()) {
    const double gn = green_value(sys, opts).value;
    const double q = min_return_probability(window, spec);
    g.lower = q * q * gn;
    g.upper = gn;
  }
  return g;
}

double srw_conductance(int dim, int n) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, double> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find({dim, n});
    if (it != cache.end()) return it->second;
  }
  validate_dimension(dim);
  const EnvWindow w(dim, Site::origin(), n + 1, false, std::vector<double>(box_volume(dim, n + 1), 1.0));
  const double c = effective_conductance(w, n, DynamicsSpec::bouchaud(0.0), Boundary::Origin);
  std::lock_guard<std::mutex> lock(mu);
  cache[{dim, n}] = c;
  return c;
}

double min_return_probability(const EnvWindow& window, const DynamicsSpec& spec) {
  require_unmasked(window, "min_return_probability");
  if (window.radius() < 2) throw std::invalid_argument("min_return_probability needs a window of radius >= 2");
  const int d = window.dim();
  const double t0 = window.at(Site::origin());
  double qmin = 1.0;
  for (int dir = 0; dir < 2 * d; ++dir) {
    const Site y = neighbour(Site::origin(), dir);
    const double ty = window.at(y);
    double total = 0.0;
    for (int e = 0; e < 2 * d; ++e) total += edge_conductance(ty, window.at(neighbour(y, e)), spec);
    qmin = std::min(qmin, edge_conductance(ty, t0, spec) / total);
  }
  return qmin;
}

double dirichlet_energy(const EnvWindow& window, int n, const DynamicsSpec& spec,
                        const std::vector<double>& f) {
  const BoxSystem sys = build_system(window, n, spec);
  if (f.size() != sys.N) throw std::invalid_argument("function size does not match the box");
  return energy_of(sys, neighbour_table(sys), f);
}

double generator_quadratic_form(const EnvWindow& window, int n, const DynamicsSpec& spec,
                                const std::vector<double>& f) {
  const BoxSystem sys = build_system(window, n, spec);
  if (f.size() != sys.N) throw std::invalid_argument("function size does not match the box");
  const auto tab = neighbour_table(sys);
  const std::size_t nd = sys.dirs();
  ExactSum s;
  for (std::size_t k = 0; k < sys.N; ++k) {
    double lf = sys.diag[k] * f[k];
    for (std::size_t dir = 0; dir < nd; ++dir) {
      const std::size_t j = tab[k * nd + dir];
      if (j != Neighbours::npos) lf -= sys.cond[k * nd + dir] * f[j];
    }
    s.add(lf * f[k]);
  }
  return s.value();
}

GreenEstimate green_monte_carlo(const Environment& env, const DynamicsSpec& spec, int kill_radius,
                                std::size_t reps, RngStream& rng) {
  if (reps < 1) throw std::invalid_argument("green_monte_carlo needs reps >= 1");
  if (kill_radius < 0) throw std::invalid_argument("kill radius must be >= 0");
  spec.validate();
  const int d = env.dim();
  std::array<double, 2 * kMaxDim> cond{};
  EmpiricalSummary times(false);
  for (std::size_t r = 0; r < reps; ++r) {
    Site x = Site::origin();
    double at_origin = 0.0;
    while (linf_norm(x, d) <= kill_radius) {
      const double tx = env.tau_at(x);
      double total = 0.0;
      for (int dir = 0; dir < 2 * d; ++dir) {
        cond[static_cast<std::size_t>(dir)] = edge_conductance(tx, env.tau_at(neighbour(x, dir)), spec);
        total += cond[static_cast<std::size_t>(dir)];
      }
      const double hold = rng.exponential() / total;
      if (x == Site::origin()) at_origin += hold;
      const double target = rng.uniform() * total;
      double acc = 0.0;
      int chosen = 2 * d - 1;
      for (int dir = 0; dir < 2 * d; ++dir) {
        acc += cond[static_cast<std::size_t>(dir)];
        if (target <= acc) {
          chosen = dir;
          break;
        }
      }
      x = neighbour(x, chosen);
    }
    times.add(at_origin);
  }
  GreenEstimate g;
  g.value = times.mean();
  g.std_error = times.std_error();
  g.box_n = kill_radius;
  g.method = GreenMethod::MonteCarlo;
  return g;
}

GreenbarMoments greenbar_moments(const EnvParams& base, const DynamicsSpec& spec, int n,
                                 std::size_t reps, std::uint64_t seed, std::optional<int> compare_n,
                                 std::size_t bootstrap_resamples) {
  if (reps < 30) throw std::invalid_argument("greenbar_moments needs reps >= 30");
  const double alpha = base.alpha;
  const int radius = std::max(n, compare_n.value_or(n)) + 1;
  GreenbarMoments m;
  m.n = n;
  m.reps = reps;
  m.alpha = alpha;
  m.compare_n = compare_n;
  m.samples.reserve(reps);
  std::vector<double> other;
  for (std::size_t k = 0; k < reps; ++k) {
    EnvParams p = base;
    p.seed = derive_seed(seed, k, 3);
    const Environment env(p);
    const EnvWindow w = env.window(Site::origin(), radius, true);
    m.samples.push_back(green_bar(w, n, spec).value);
    if (compare_n) other.push_back(green_bar(w, *compare_n, spec).value);
  }
  std::vector<double> pa(reps), pinv(reps);
  for (std::size_t k = 0; k < reps; ++k) {
    pa[k] = std::pow(m.samples[k], alpha - 1.0);
    pinv[k] = 1.0 / m.samples[k];
  }
  RngStream rng(derive_seed(seed, reps, 4));
  const BootstrapConfig cfg{bootstrap_resamples, 0.95};
  const auto ba = bootstrap_mean(pa, rng, cfg);
  const auto bi = bootstrap_mean(pinv, rng, cfg);
  m.moment_alpha = ba.estimate;
  m.se_alpha = ba.std_error;
  m.moment_inverse = bi.estimate;
  m.se_inverse = bi.std_error;
  if (compare_n) {
    double sa = 0.0, si = 0.0;
    for (double g : other) {
      sa += std::pow(g, alpha - 1.0);
      si += 1.0 / g;
    }
    m.compare_moment_alpha = sa / static_cast<double>(reps);
    m.compare_moment_inverse = si / static_cast<double>(reps);
  }
  return m;
}

}  // namespace trapkit
