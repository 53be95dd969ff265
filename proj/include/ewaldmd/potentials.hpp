#pragma once

#include "ewaldmd/core_model.hpp"
#include "ewaldmd/ewald.hpp"
#include "ewaldmd/loop_engine.hpp"

namespace ewaldmd {

// 12-6 Lennard-Jones, energy-shifted to zero at the cutoff. The defaults keep
// ions apart at one particle per (2.5 Angstrom)^3.
struct LJParams {
  double epsilon = 1.0;
  double sigma = 2.5;
  double cutoff = 6.25;
};

double lj_energy_unshifted(double r, const LJParams& p);

// Force on center i and the shifted pair energy; dr = r_i - r_j.
PairTerm lj_pair(const Vec3& dr, const LJParams& p);

// Accumulates forces into F and returns the total shifted LJ energy.
double lennard_jones(const LoopEngine& engine, ParticleSet& ps, const CellList& cl, const LJParams& p);

}  // namespace ewaldmd
