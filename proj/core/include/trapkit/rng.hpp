#pragma once

#include <cstdint>
#include <random>

namespace trapkit {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for an independent stream identified by (master, id, tag).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t id, std::uint64_t tag = 0) {
  return mix64(mix64(mix64(master) ^ id) ^ (tag * 0xd1b54a32d192ed03ULL));
}

/// Map a 64-bit word k to (k + 1) / 2^64, a uniform in (0, 1]. Zero is unreachable.
constexpr double unit_from_bits(std::uint64_t k) {
  return (static_cast<double>(k) + 1.0) * 0x1p-64;
}

/// Sequential random stream. Wraps mt19937_64 and exposes the handful of
/// draws the simulations need.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t bits() { return engine_(); }

  /// Uniform in (0, 1].
  double uniform() { return unit_from_bits(engine_()); }
  /// Uniform in [0, 1).
  double uniform_half_open() { return 1.0 - uniform(); }
  double exponential() { return exp_(engine_); }
  double normal() { return normal_(engine_); }
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  std::exponential_distribution<double> exp_{1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace trapkit
