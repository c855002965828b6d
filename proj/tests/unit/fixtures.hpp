// Shared stationary states; solved once per process.
#pragma once

#include <cmath>
#include <map>
#include <numbers>
#include <tuple>

#include "pnp/stationary.hpp"

namespace fixtures {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Harmonic confinement in d = 2 on a uniform grid wide enough that the tail
/// carries no mass: R_max = 9 / sqrt(mu).
inline const pnp::StationaryState& harmonic_state(int intervals = 1024, double mu = 1.0, double mass = two_pi) {
  static std::map<std::tuple<int, double, double>, pnp::StationaryState> cache;
  const auto key = std::make_tuple(intervals, mu, mass);
  auto it = cache.find(key);
  if (it == cache.end()) {
    auto grid = pnp::make_grid(2, 9.0 / std::sqrt(mu), intervals, pnp::SpacingSpec::uniform());
    it = cache.emplace(key, pnp::solve_fixed_point(pnp::Potential::harmonic(mu), mass, grid)).first;
  }
  return it->second;
}

}  // namespace fixtures
