#include "ewaldmd/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ewaldmd/error.hpp"

namespace ewaldmd {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::cutoff_too_large: return "cutoff-too-large";
    case ErrorKind::contract_violation: return "contract-violation";
    case ErrorKind::box_too_small: return "box-too-small";
    case ErrorKind::kspace_empty: return "kspace-empty";
    case ErrorKind::coincident_particles: return "coincident-particles";
    case ErrorKind::neutrality_violation: return "neutrality-violation";
    case ErrorKind::too_large_for_oracle: return "too-large-for-oracle";
    case ErrorKind::invalid_lattice: return "invalid-lattice";
    case ErrorKind::parse_error: return "parse-error";
    case ErrorKind::io_error: return "io-error";
  }
  return "unknown";
}

SimulationBox::SimulationBox(double edge_length) : edge_(edge_length) {
  if (!(edge_length > 0.0) || !std::isfinite(edge_length)) {
    throw Error(ErrorKind::invalid_argument, "box edge must be positive and finite");
  }
}

const char* property_name(Property p) {
  switch (p) {
    case Property::position: return "position";
    case Property::charge: return "charge";
    case Property::force: return "force";
    case Property::velocity: return "velocity";
    case Property::mass: return "mass";
  }
  return "?";
}

ParticleSet::ParticleSet(std::size_t n, const SimulationBox& box) : count_(n), box_(box) {
  for (std::size_t p = 0; p < kPropertyCount; ++p) {
    arrays_[p].assign(n * property_width(static_cast<Property>(p)), 0.0);
  }
}

void ParticleSet::zero(Property p) { std::fill(arrays_[index(p)].begin(), arrays_[index(p)].end(), 0.0); }

void ParticleSet::wrap_positions() {
  const double L = box_.edge_length();
  for (double& x : arrays_[index(Property::position)]) x = detail::wrap_component(x, L);
}

bool ParticleSet::consistent() const {
  for (std::size_t p = 0; p < kPropertyCount; ++p) {
    if (arrays_[p].size() != count_ * property_width(static_cast<Property>(p))) return false;
  }
  return true;
}

ParticleSet create_particle_set(long long n, const SimulationBox& box) {
  if (n <= 0) {
    throw Error(ErrorKind::invalid_argument, "particle count must be at least 1, got " + std::to_string(n));
  }
  return ParticleSet(static_cast<std::size_t>(n), box);
}

double total_charge(const ParticleSet& ps) {
  double sum = 0.0;
  for (double q : ps.data(Property::charge)) sum += q;
  return sum;
}

void GlobalAccumulator::zero() { std::fill(values_.begin(), values_.end(), 0.0); }

}  // namespace ewaldmd
