#pragma once

// Slow reference implementations, single-threaded and independent of the
// cell list, the half-space k storage and the phase recurrences.

#include <functional>
#include <vector>

#include "ewaldmd/core_model.hpp"
#include "ewaldmd/ewald.hpp"

namespace ewaldmd::oracle {

// Direct image sum (1/2) sum' q_i q_j / |r_ij + L n| over |n|_inf <= n_shells.
// Boundary image cells carry Evjen weights: 1/2 per coordinate sitting on the
// outer shell (faces 1/2, edges 1/4, corners 1/8). The cubic-shape surface term
// 2 pi |M|^2 / (3V) of the cell dipole M is removed, which gives the
// conducting-boundary energy that Ewald summation computes.
double direct_lattice_sum(const ParticleSet& ps, int n_shells);

inline constexpr std::size_t kReferenceParticleLimit = 200;

struct Reference {
  double energy = 0.0;
  std::vector<Vec3> forces;
};

// All pairs over the nearest image plus the first image shell in real space,
// and every k with |k| < 2 k_c evaluated with direct sin/cos.
Reference direct_ewald_reference(const ParticleSet& ps, const EwaldParams& params);

using EnergyFn = std::function<double(ParticleSet&)>;

// -(U(r + h e) - U(r - h e)) / (2h) per particle and axis.
std::vector<Vec3> finite_difference_forces(const EnergyFn& energy, const ParticleSet& ps, double h);

}  // namespace ewaldmd::oracle
