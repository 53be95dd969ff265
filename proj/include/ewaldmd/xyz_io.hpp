#pragma once

#include <filesystem>
#include <iosfwd>

#include "ewaldmd/core_model.hpp"

namespace ewaldmd {

// Extended XYZ with a cubic lattice and a charge column:
//
//   N
//   Lattice="L 0 0 0 L 0 0 0 L" Properties=species:S:1:pos:R:3:charge:R:1
//   Na x y z q
//
// Reals are written with 17 significant digits so a round trip is exact.
void write_xyz(const ParticleSet& ps, std::ostream& out);
void write_xyz(const ParticleSet& ps, const std::filesystem::path& path);

ParticleSet read_xyz(std::istream& in);
ParticleSet read_xyz(const std::filesystem::path& path);

}  // namespace ewaldmd
