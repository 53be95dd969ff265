#pragma once

#include <span>
#include <string>
#include <vector>

#include "ewaldmd/core_model.hpp"
#include "ewaldmd/ewald.hpp"
#include "ewaldmd/loop_engine.hpp"
#include "ewaldmd/sim_driver.hpp"

namespace ewaldmd {

struct CoulombEvaluation {
  CoulombEnergy energy;
  std::vector<Vec3> forces;
};

// Fresh Coulomb energy and forces on a copy of ps.
CoulombEvaluation evaluate_coulomb(const LoopEngine& engine, const ParticleSet& ps, const EwaldParams& params,
                                   const CoulombFaults& faults = {});

// Total Coulomb energy for an explicit alpha with cutoffs derived from the
// tolerance. When that alpha needs r_c > L/2 the energy is evaluated on the
// smallest periodic supercell that admits it and divided by the copy count.
double coulomb_energy_with_alpha(const LoopEngine& engine, const ParticleSet& ps, double tolerance, double alpha);

// Largest per-component relative deviation; components differing by no more
// than absolute_floor count as agreeing.
double force_mismatch(std::span<const Vec3> analytic, std::span<const Vec3> reference, double absolute_floor = 1e-8);

// Finite-difference checks run at no looser truncation than this.
inline constexpr double kFiniteDifferenceTolerance = 1e-10;
inline constexpr std::size_t kLatticeCheckLimit = 64;

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;

  bool all_passed() const;
  std::string human() const;
  std::string json_lines() const;
};

struct VerifyOptions {
  double jitter = 0.1;  // Angstrom; applied to generated lattices only
  bool negate_self_energy = false;
  int lattice_shells = 10;
  // Ordered crystal for the direct lattice-sum check; skipped when null.
  const ParticleSet* lattice_reference = nullptr;
};

VerifyReport verify(const SimConfig& config, const ParticleSet& ps, const VerifyOptions& options = {});

// Jittered rock-salt system built from the configuration.
VerifyReport verify(const SimConfig& config, const VerifyOptions& options = {});

}  // namespace ewaldmd
