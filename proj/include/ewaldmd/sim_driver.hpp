#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "ewaldmd/core_model.hpp"
#include "ewaldmd/ewald.hpp"
#include "ewaldmd/loop_engine.hpp"
#include "ewaldmd/potentials.hpp"

namespace ewaldmd {

struct SimConfig {
  long long n_particles = 1728;
  double box = 30.0;  // Angstrom
  double tolerance = 1e-6;
  ParameterOverrides ewald;
  bool coulomb = true;
  bool lj = true;
  LJParams lj_params;
  double dt = 0.01;
  long long n_steps = 10;
  double velocity_scale = 0.0;  // std. dev. of each initial velocity component; 0 = at rest
  std::uint64_t seed = 12345;
  std::size_t threads = 1;  // 0 = hardware concurrency
};

inline constexpr double kSodiumMass = 22.99;
inline constexpr double kChlorideMass = 35.45;

// Simple cubic lattice of 2*cells_per_dim sites per axis with alternating +1/-1
// charges; L = 2 * cells_per_dim * spacing.
ParticleSet init_rocksalt(int cells_per_dim, double spacing);

// Rock-salt system for n particles in a box of edge L: n must be an even cube.
ParticleSet build_system(const SimConfig& config);

// Gaussian velocities with zero total momentum.
void assign_velocities(ParticleSet& ps, double scale, std::uint64_t seed);

// Uniform random displacement in [-amplitude, amplitude] per component, then wrap.
void jitter_positions(ParticleSet& ps, double amplitude, std::uint64_t seed);

// Periodic supercell with `factor` copies of the box along each axis.
ParticleSet replicate(const ParticleSet& ps, int factor);

double kinetic_energy(const ParticleSet& ps);

// Refreshes forces for the current positions and returns the potential energy.
using ForceAssembler = std::function<double(ParticleSet&)>;

// One velocity-Verlet step; forces must be current on entry and are current on
// exit. Returns the potential energy at the new positions.
double velocity_verlet_step(const LoopEngine& engine, ParticleSet& ps, double dt, const ForceAssembler& assemble);

struct ForceTimings {
  double short_range = 0.0;
  double rho_hat = 0.0;
  double long_range = 0.0;
  double lj = 0.0;
  double zeroing = 0.0;
};

struct PotentialEnergy {
  double coulomb = 0.0;
  double lj = 0.0;
  double total() const { return coulomb + lj; }
};

// Zero forces, then Coulomb, then Lennard-Jones.
class ForceField {
 public:
  ForceField(const SimConfig& config, const SimulationBox& box, long long n);

  PotentialEnergy assemble(const LoopEngine& engine, ParticleSet& ps);

  const std::optional<EwaldCoulomb>& coulomb() const noexcept { return coulomb_; }
  const ForceTimings& last_timings() const noexcept { return timings_; }

 private:
  std::optional<EwaldCoulomb> coulomb_;
  std::optional<LJParams> lj_;
  SimulationBox box_;
  ForceTimings timings_;
};

struct StepRecord {
  double wall = 0.0;
  double t_short_range = 0.0;
  double t_rho_hat = 0.0;
  double t_long_range = 0.0;
  double t_lj = 0.0;
  double t_integrate = 0.0;
  double e_coulomb = 0.0;
  double e_lj = 0.0;
  double e_kinetic = 0.0;
  double e_total() const { return e_coulomb + e_lj + e_kinetic; }
  double component_sum() const { return t_short_range + t_rho_hat + t_long_range + t_lj + t_integrate; }
};

struct RunMetrics {
  std::optional<EwaldParams> params;
  std::size_t k_vectors = 0;  // stored half-space count
  std::size_t workers = 1;
  double setup_seconds = 0.0;
  StepRecord initial;
  std::vector<StepRecord> steps;
  double max_relative_drift = 0.0;
};

RunMetrics run(const SimConfig& config);
RunMetrics run(const SimConfig& config, ParticleSet& ps);

}  // namespace ewaldmd
