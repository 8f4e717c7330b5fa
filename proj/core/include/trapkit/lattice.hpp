#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace trapkit {

/// Largest lattice dimension supported by the fixed-capacity Site type.
inline constexpr int kMaxDim = 8;

/// A point of Z^d. Coordinates beyond the active dimension are kept at zero,
/// so equality and hashing do not need to know d.
struct Site {
  std::array<std::int32_t, kMaxDim> x{};

  constexpr std::int32_t& operator[](int i) { return x[static_cast<std::size_t>(i)]; }
  constexpr std::int32_t operator[](int i) const { return x[static_cast<std::size_t>(i)]; }

  friend constexpr bool operator==(const Site&, const Site&) = default;

  friend constexpr Site operator+(Site a, const Site& b) {
    for (int i = 0; i < kMaxDim; ++i) a[i] += b[i];
    return a;
  }
  friend constexpr Site operator-(Site a, const Site& b) {
    for (int i = 0; i < kMaxDim; ++i) a[i] -= b[i];
    return a;
  }
  constexpr Site operator-() const {
    Site r;
    for (int i = 0; i < kMaxDim; ++i) r[i] = -x[static_cast<std::size_t>(i)];
    return r;
  }

  static constexpr Site origin() { return Site{}; }
  static constexpr Site unit(int axis, int sign = 1) {
    Site s;
    s[axis] = sign;
    return s;
  }
};

struct SiteHash {
  std::size_t operator()(const Site& s) const noexcept;
};

/// Build a site from up to kMaxDim coordinates.
Site make_site(std::initializer_list<std::int32_t> coords);
Site make_site(const std::vector<std::int32_t>& coords);
std::vector<std::int32_t> coordinates(const Site& s, int dim);

/// Neighbour of `s` along direction `dir` in [0, 2d): axis dir/2, sign + for even dir.
constexpr Site neighbour(Site s, int dir) {
  s[dir / 2] += (dir % 2 == 0) ? 1 : -1;
  return s;
}

/// The closed 1-neighbourhood offsets {0, +-e_1, ..., +-e_d}, sorted
/// lexicographically by coordinate vector. This is the fixed enumeration
/// order used by the exploration process.
const std::vector<Site>& neighbourhood_offsets(int dim);

std::int64_t l1_norm(const Site& s, int dim);
std::int32_t linf_norm(const Site& s, int dim);
bool are_neighbours(const Site& a, const Site& b, int dim);

/// Number of sites in the box {-r..r}^d.
std::size_t box_volume(int dim, int radius);

std::string to_string(const Site& s, int dim);

void validate_dimension(int dim);

}  // namespace trapkit
