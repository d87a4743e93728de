// Counter-based normal variates. A draw is a pure function of
// (seed, stream, step, component), so Monte Carlo runs can be executed in any
// order or on any number of threads and still reproduce bit-for-bit.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace fwkit {

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(detail::splitmix64(detail::splitmix64(seed) ^ (stream * 0xd6e8feb86659fd93ULL))) {}

  /// Raw 64 random bits for counter `ctr`.
  constexpr std::uint64_t bits(std::uint64_t ctr) const {
    return detail::splitmix64(key_ ^ detail::splitmix64(ctr + 0x632be59bd9b4e019ULL));
  }

  /// Uniform on the open interval (0, 1).
  double uniform(std::uint64_t ctr) const {
    return (static_cast<double>(bits(ctr) >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Pair of independent standard normals for step `step` (Box-Muller).
  void normal_pair(std::uint64_t step, double& z0, double& z1) const {
    const double u1 = uniform(2 * step);
    const double u2 = uniform(2 * step + 1);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    z0 = r * std::cos(a);
    z1 = r * std::sin(a);
  }

  double normal(std::uint64_t step) const {
    double z0, z1;
    normal_pair(step, z0, z1);
    return z0;
  }

 private:
  std::uint64_t key_;
};

}  // namespace fwkit
