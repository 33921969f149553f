#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace swl {

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  return splitmix64(h ^ splitmix64(v + 0x632be59bd9b4e019ULL));
}

/// Uniform in (0, 1] from the top 53 bits.
inline double to_unit_open_closed(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace detail

/// Counter-based Gaussian source. Every variate is a pure function of
/// (seed, trial, row, col, component), so sampling order and thread schedule
/// never change the result.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;

  /// Both Box-Muller outputs for pair `pair` of entry (row, col); component
  /// 2*pair is the first, 2*pair + 1 the second.
  std::array<double, 2> normal_pair(std::uint64_t row, std::uint64_t col, std::uint64_t pair) const {
    std::uint64_t h = detail::hash_combine(seed, trial);
    h = detail::hash_combine(h, row);
    h = detail::hash_combine(h, col);
    h = detail::hash_combine(h, pair);
    const double u1 = detail::to_unit_open_closed(detail::splitmix64(h ^ 0x1ULL));
    const double u2 = detail::to_unit_open_closed(detail::splitmix64(h ^ 0x2ULL));
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(theta), r * std::sin(theta)};
  }

  /// Standard normal for the given entry coordinate.
  double normal(std::uint64_t row, std::uint64_t col, unsigned component) const {
    return normal_pair(row, col, component / 2)[component % 2];
  }

  /// Uniform in (0, 1] keyed like normal(); used by inverse-transform tests.
  double uniform(std::uint64_t row, std::uint64_t col = 0) const {
    std::uint64_t h = detail::hash_combine(seed, trial);
    h = detail::hash_combine(h, row);
    h = detail::hash_combine(h, col);
    return detail::to_unit_open_closed(detail::splitmix64(h ^ 0x3ULL));
  }

  RngStream with_trial(std::uint64_t t) const { return {seed, t}; }
};

}  // namespace swl
