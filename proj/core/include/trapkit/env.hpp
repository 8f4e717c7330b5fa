#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "trapkit/lattice.hpp"

namespace trapkit {

/// Piecewise-linear inverse CDF u -> tau over knots u_0 < ... < u_m = 1.
/// Below the first knot the table continues with an exact y^{-alpha}
/// tail anchored at (u_0, tau_0), unless u_0 == 0.
struct InverseCdfTable {
  std::vector<double> u;
  std::vector<double> tau;

  /// Throws std::invalid_argument unless knots are valid for tail `alpha`.
  void validate() const;
  double operator()(double uniform, double alpha) const;

  /// Degenerate law tau == value (>= 1).
  static InverseCdfTable constant(double value);
  friend bool operator==(const InverseCdfTable&, const InverseCdfTable&) = default;
};

struct EnvParams {
  double alpha = 0.5;
  int dim = 5;
  std::uint64_t seed = 1;
  /// Empty: exact Pareto tail P[tau >= y] = y^{-alpha}, y >= 1.
  std::optional<InverseCdfTable> table;

  void validate() const;
  friend bool operator==(const EnvParams&, const EnvParams&) = default;
};

/// Exact Pareto inverse CDF: u^{-1/alpha}.
double pareto_depth(double u, double alpha);

class EnvWindow;

/// Lazily evaluated i.i.d. environment x -> tau_x on Z^d.
///
/// tau_at is a pure function of (seed, x + origin_offset): a counter-based
/// hash of the coordinates is mapped to u in (0, 1] and pushed through the
/// inverse CDF. Instances are immutable and safe to share across threads.
class Environment {
 public:
  explicit Environment(EnvParams params, Site origin_offset = Site::origin());

  const EnvParams& params() const { return params_; }
  int dim() const { return params_.dim; }
  const Site& origin_offset() const { return offset_; }

  /// The uniform driving tau at x.
  double uniform_at(const Site& x) const;
  double tau_at(const Site& x) const { return depth_from_uniform(uniform_at(x)); }
  double depth_from_uniform(double u) const;

  /// theta_x: result.tau_at(y) == tau_at(x + y).
  Environment translated(const Site& x) const;

  EnvWindow window(const Site& center, int radius, bool mask_center) const;

 private:
  EnvParams params_;
  Site offset_;
  std::uint64_t key_;
};

/// Finite table of depths over the box of given radius around `center`,
/// indexed by offsets from the center. A masked window has no value at the
/// center ("the environment without its value at the origin").
class EnvWindow {
 public:
  EnvWindow(int dim, Site center, int radius, bool masked, std::vector<double> values);

  int dim() const { return dim_; }
  const Site& center() const { return center_; }
  int radius() const { return radius_; }
  bool masked() const { return masked_; }

  bool contains(const Site& offset) const { return linf_norm(offset, dim_) <= radius_; }
  std::size_t index(const Site& offset) const;
  Site offset_of(std::size_t index) const;

  /// Depth at `offset` from the center. Throws for the masked center or
  /// offsets outside the box.
  double at(const Site& offset) const;

  /// Number of stored entries (box volume, minus one when masked).
  std::size_t size() const { return masked_ ? values_.size() - 1 : values_.size(); }
  std::size_t volume() const { return values_.size(); }

  /// Raw storage in box order; the masked center slot holds NaN.
  const std::vector<double>& raw() const { return values_; }

  /// Copy with the center set to `tau0` (unmasked).
  EnvWindow with_center(double tau0) const;
  /// Copy with the center removed.
  EnvWindow masked_copy() const;
  /// Same center, smaller radius.
  EnvWindow shrunk(int radius) const;

 private:
  int dim_;
  Site center_;
  int radius_;
  bool masked_;
  std::vector<double> values_;
};

}  // namespace trapkit
