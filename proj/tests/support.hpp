#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "ewaldmd/core_model.hpp"

namespace testing {

// n uniform particles in [0, L)^3 with alternating +-1 charges (neutral for even n).
inline ewaldmd::ParticleSet random_neutral(std::size_t n, double L, std::uint64_t seed) {
  ewaldmd::ParticleSet ps(n, ewaldmd::SimulationBox(L));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, L);
  for (std::size_t i = 0; i < n; ++i) {
    ps.set_position(i, {u(rng), u(rng), u(rng)});
    ps.set_charge(i, i % 2 == 0 ? 1.0 : -1.0);
    ps.set_mass(i, 1.0);
  }
  return ps;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testing
