#include "trapkit/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "trapkit/rng.hpp"

namespace trapkit {

void InverseCdfTable::validate() const {
  if (u.size() < 2 || u.size() != tau.size()) {
    throw std::invalid_argument("inverse-CDF table needs >= 2 knots with matching sizes");
  }
  if (u.front() < 0.0 || u.back() != 1.0) {
    throw std::invalid_argument("inverse-CDF knots must lie in [0, 1] and end at u = 1");
  }
  for (std::size_t i = 1; i < u.size(); ++i) {
    if (!(u[i] > u[i - 1])) throw std::invalid_argument("inverse-CDF knots must increase in u");
    if (tau[i] > tau[i - 1]) throw std::invalid_argument("inverse-CDF depths must not increase in u");
  }
  for (double t : tau) {
    if (!(t >= 1.0) || !std::isfinite(t)) {
      throw std::invalid_argument("inverse-CDF depths must be finite and >= 1");
    }
  }
}

double InverseCdfTable::operator()(double uniform, double alpha) const {
  if (uniform <= u.front()) {
    if (u.front() == 0.0) return tau.front();
    return tau.front() * std::pow(uniform / u.front(), -1.0 / alpha);
  }
  auto it = std::upper_bound(u.begin(), u.end(), uniform);
  if (it == u.end()) return tau.back();
  const std::size_t j = static_cast<std::size_t>(it - u.begin());
  const double w = (uniform - u[j - 1]) / (u[j] - u[j - 1]);
  return tau[j - 1] + w * (tau[j] - tau[j - 1]);
}

InverseCdfTable InverseCdfTable::constant(double value) {
  InverseCdfTable t{{0.0, 1.0}, {value, value}};
  t.validate();
  return t;
}

void EnvParams::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie strictly in (0, 1), got " + std::to_string(alpha));
  }
  validate_dimension(dim);
  if (table) table->validate();
}

double pareto_depth(double u, double alpha) { return std::pow(u, -1.0 / alpha); }

Environment::Environment(EnvParams params, Site origin_offset)
    : params_(std::move(params)), offset_(origin_offset), key_(mix64(params_.seed)) {
  params_.validate();
}

double Environment::uniform_at(const Site& x) const {
  // Coordinates are consumed two at a time as one 64-bit word, each word
  // folded in through the SplitMix64 finalizer.
  std::uint64_t h = key_;
  for (int i = 0; i < params_.dim; i += 2) {
    std::uint64_t w = static_cast<std::uint32_t>(x[i] + offset_[i]);
    if (i + 1 < params_.dim) {
      w |= static_cast<std::uint64_t>(static_cast<std::uint32_t>(x[i + 1] + offset_[i + 1])) << 32;
    }
    h = mix64(h ^ w);
  }
  return unit_from_bits(h);
}

double Environment::depth_from_uniform(double u) const {
  if (params_.table) return (*params_.table)(u, params_.alpha);
  return pareto_depth(u, params_.alpha);
}

Environment Environment::translated(const Site& x) const {
  return Environment(params_, offset_ + x);
}

EnvWindow Environment::window(const Site& center, int radius, bool mask_center) const {
  if (radius < 1) throw std::invalid_argument("window radius must be >= 1");
  const int d = params_.dim;
  const std::size_t vol = box_volume(d, radius);
  std::vector<double> values(vol);
  Site off;
  for (int i = 0; i < d; ++i) off[i] = -radius;
  for (std::size_t k = 0; k < vol; ++k) {
    values[k] = tau_at(center + off);
    for (int i = 0; i < d; ++i) {
      if (++off[i] < radius + 1) break;
      off[i] = -radius;
    }
  }
  EnvWindow w(d, center, radius, false, std::move(values));
  return mask_center ? w.masked_copy() : w;
}

EnvWindow::EnvWindow(int dim, Site center, int radius, bool masked, std::vector<double> values)
    : dim_(dim), center_(center), radius_(radius), masked_(masked), values_(std::move(values)) {
  validate_dimension(dim);
  if (radius < 0) throw std::invalid_argument("window radius must be >= 0");
  if (values_.size() != box_volume(dim, radius)) {
    throw std::invalid_argument("window value count does not match the box volume");
  }
  if (masked_) values_[index(Site::origin())] = std::numeric_limits<double>::quiet_NaN();
}

std::size_t EnvWindow::index(const Site& offset) const {
  if (!contains(offset)) {
    throw std::out_of_range("offset " + to_string(offset, dim_) + " outside window of radius " +
                            std::to_string(radius_));
  }
  const std::size_t side = static_cast<std::size_t>(2 * radius_ + 1);
  std::size_t idx = 0;
  for (int i = dim_ - 1; i >= 0; --i) {
    idx = idx * side + static_cast<std::size_t>(offset[i] + radius_);
  }
  return idx;
}

Site EnvWindow::offset_of(std::size_t index) const {
  const std::size_t side = static_cast<std::size_t>(2 * radius_ + 1);
  Site s;
  for (int i = 0; i < dim_; ++i) {
    s[i] = static_cast<std::int32_t>(index % side) - radius_;
    index /= side;
  }
  return s;
}

double EnvWindow::at(const Site& offset) const {
  if (masked_ && offset == Site::origin()) {
    throw std::out_of_range("masked window has no value at its center");
  }
  return values_[index(offset)];
}

EnvWindow EnvWindow::with_center(double tau0) const {
  if (!(tau0 >= 1.0)) throw std::invalid_argument("center depth must be >= 1");
  EnvWindow w = *this;
  w.masked_ = false;
  w.values_[index(Site::origin())] = tau0;
  return w;
}

EnvWindow EnvWindow::masked_copy() const {
  EnvWindow w = *this;
  w.masked_ = true;
  w.values_[index(Site::origin())] = std::numeric_limits<double>::quiet_NaN();
  return w;
}

EnvWindow EnvWindow::shrunk(int radius) const {
  if (radius > radius_ || radius < 0) throw std::invalid_argument("cannot shrink window to that radius");
  std::vector<double> v(box_volume(dim_, radius));
  EnvWindow out(dim_, center_, radius, false, std::move(v));
  for (std::size_t k = 0; k < out.values_.size(); ++k) {
    out.values_[k] = values_[index(out.offset_of(k))];
  }
  out.masked_ = masked_;
  return out;
}

}  // namespace trapkit
