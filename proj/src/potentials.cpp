#include "ewaldmd/potentials.hpp"

#include "ewaldmd/error.hpp"

namespace ewaldmd {

double lj_energy_unshifted(double r, const LJParams& p) {
  const double sr6 = std::pow(p.sigma / r, 6);
  return 4.0 * p.epsilon * (sr6 * sr6 - sr6);
}

PairTerm lj_pair(const Vec3& dr, const LJParams& p) {
  const double r2 = dot(dr, dr);
  if (r2 == 0.0) throw Error(ErrorKind::coincident_particles, "Lennard-Jones pair at zero separation");
  const double s2 = p.sigma * p.sigma / r2;
  const double s6 = s2 * s2 * s2;
  const double radial = 24.0 * p.epsilon * (2.0 * s6 * s6 - s6) / r2;
  const double energy = 4.0 * p.epsilon * (s6 * s6 - s6) - lj_energy_unshifted(p.cutoff, p);
  return PairTerm{dr * radial, energy};
}

double lennard_jones(const LoopEngine& engine, ParticleSet& ps, const CellList& cl, const LJParams& p) {
  if (cl.cutoff() != p.cutoff) {
    throw Error(ErrorKind::contract_violation, "cell list cutoff differs from the Lennard-Jones cutoff");
  }
  GlobalAccumulator energy(1);
  AccessList access;
  access.particle(Property::force, Access::inc);
  const GlobalSlot u = access.global(energy, Access::inc_zero);
  auto body = [=](const PairView& v) {
    const PairTerm t = lj_pair(v.separation(), p);
    v.inc_center(Property::force, t.force);
    v.inc_global(u, 0, 0.5 * t.energy);
  };
  engine.execute_pair_loop(PairKernel<decltype(body)>{std::move(access), body}, ps, cl);
  return energy[0];
}

}  // namespace ewaldmd
