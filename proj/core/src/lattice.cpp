#include "trapkit/lattice.hpp"

#include <algorithm>
#include <cstdlib>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "trapkit/rng.hpp"

namespace trapkit {

std::size_t SiteHash::operator()(const Site& s) const noexcept {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (int i = 0; i < kMaxDim; ++i) {
    h = mix64(h ^ static_cast<std::uint32_t>(s[i]));
  }
  return static_cast<std::size_t>(h);
}

void validate_dimension(int dim) {
  if (dim < 1 || dim > kMaxDim) {
    throw std::invalid_argument("dimension must be in [1, " + std::to_string(kMaxDim) +
                                "], got " + std::to_string(dim));
  }
}

Site make_site(std::initializer_list<std::int32_t> coords) {
  if (coords.size() > static_cast<std::size_t>(kMaxDim)) {
    throw std::invalid_argument("too many coordinates for Site");
  }
  Site s;
  int i = 0;
  for (auto c : coords) s[i++] = c;
  return s;
}

Site make_site(const std::vector<std::int32_t>& coords) {
  if (coords.size() > static_cast<std::size_t>(kMaxDim)) {
    throw std::invalid_argument("too many coordinates for Site");
  }
  Site s;
  for (std::size_t i = 0; i < coords.size(); ++i) s[static_cast<int>(i)] = coords[i];
  return s;
}

std::vector<std::int32_t> coordinates(const Site& s, int dim) {
  return {s.x.begin(), s.x.begin() + dim};
}

const std::vector<Site>& neighbourhood_offsets(int dim) {
  validate_dimension(dim);
  static std::array<std::vector<Site>, kMaxDim + 1> cache;
  static std::once_flag flags[kMaxDim + 1];
  std::call_once(flags[dim], [dim] {
    std::vector<Site> offs;
    offs.push_back(Site::origin());
    for (int i = 0; i < dim; ++i) {
      offs.push_back(Site::unit(i, +1));
      offs.push_back(Site::unit(i, -1));
    }
    std::sort(offs.begin(), offs.end(),
              [](const Site& a, const Site& b) { return a.x < b.x; });
    cache[dim] = std::move(offs);
  });
  return cache[dim];
}

std::int64_t l1_norm(const Site& s, int dim) {
  std::int64_t n = 0;
  for (int i = 0; i < dim; ++i) n += std::abs(static_cast<std::int64_t>(s[i]));
  return n;
}

std::int32_t linf_norm(const Site& s, int dim) {
  std::int32_t n = 0;
  for (int i = 0; i < dim; ++i) n = std::max(n, std::abs(s[i]));
  return n;
}

bool are_neighbours(const Site& a, const Site& b, int dim) { return l1_norm(a - b, dim) == 1; }

std::size_t box_volume(int dim, int radius) {
  std::size_t side = static_cast<std::size_t>(2 * radius + 1);
  std::size_t v = 1;
  for (int i = 0; i < dim; ++i) v *= side;
  return v;
}

std::string to_string(const Site& s, int dim) {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < dim; ++i) {
    if (i) os << ',';
    os << s[i];
  }
  os << ')';
  return os.str();
}

}  // namespace trapkit
