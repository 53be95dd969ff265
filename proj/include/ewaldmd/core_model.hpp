#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "ewaldmd/vec3.hpp"

namespace ewaldmd {

// Cubic periodic domain [0, L)^3.
class SimulationBox {
 public:
  explicit SimulationBox(double edge_length);

  double edge_length() const noexcept { return edge_; }
  double volume() const noexcept { return edge_ * edge_ * edge_; }

 private:
  double edge_;
};

namespace detail {
inline double wrap_component(double x, double L) {
  double w = x - L * std::floor(x / L);
  // x slightly below zero can round up to exactly L.
  if (w >= L) w = 0.0;
  return w;
}

inline double image_component(double d, double L) {
  double m = d - L * std::floor(d / L + 0.5);
  if (m >= 0.5 * L) m -= L;
  return m;
}
}  // namespace detail

inline Vec3 wrap_position(const Vec3& r, const SimulationBox& box) {
  const double L = box.edge_length();
  return {detail::wrap_component(r.x, L), detail::wrap_component(r.y, L), detail::wrap_component(r.z, L)};
}

// Components land in [-L/2, L/2).
inline Vec3 minimum_image(const Vec3& dr, const SimulationBox& box) {
  const double L = box.edge_length();
  return {detail::image_component(dr.x, L), detail::image_component(dr.y, L), detail::image_component(dr.z, L)};
}

enum class Property : std::size_t { position = 0, charge, force, velocity, mass };
inline constexpr std::size_t kPropertyCount = 5;

constexpr std::size_t property_width(Property p) {
  return (p == Property::charge || p == Property::mass) ? 1 : 3;
}

const char* property_name(Property p);

// Structure-of-arrays particle storage. Each property is one contiguous array of
// size() * property_width(p) doubles; vector properties are interleaved xyz.
class ParticleSet {
 public:
  ParticleSet(std::size_t n, const SimulationBox& box);

  std::size_t size() const noexcept { return count_; }
  const SimulationBox& box() const noexcept { return box_; }

  std::span<double> data(Property p) { return arrays_[index(p)]; }
  std::span<const double> data(Property p) const { return arrays_[index(p)]; }

  Vec3 position(std::size_t i) const { return vec(Property::position, i); }
  Vec3 force(std::size_t i) const { return vec(Property::force, i); }
  Vec3 velocity(std::size_t i) const { return vec(Property::velocity, i); }
  double charge(std::size_t i) const { return arrays_[index(Property::charge)][i]; }
  double mass(std::size_t i) const { return arrays_[index(Property::mass)][i]; }

  void set_position(std::size_t i, const Vec3& r) { set_vec(Property::position, i, r); }
  void set_force(std::size_t i, const Vec3& f) { set_vec(Property::force, i, f); }
  void set_velocity(std::size_t i, const Vec3& v) { set_vec(Property::velocity, i, v); }
  void set_charge(std::size_t i, double q) { arrays_[index(Property::charge)][i] = q; }
  void set_mass(std::size_t i, double m) { arrays_[index(Property::mass)][i] = m; }

  void zero(Property p);
  void wrap_positions();

  // Audit: every property array has the expected length.
  bool consistent() const;

 private:
  static constexpr std::size_t index(Property p) { return static_cast<std::size_t>(p); }
  Vec3 vec(Property p, std::size_t i) const {
    const auto& a = arrays_[index(p)];
    return {a[3 * i], a[3 * i + 1], a[3 * i + 2]};
  }
  void set_vec(Property p, std::size_t i, const Vec3& v) {
    auto& a = arrays_[index(p)];
    a[3 * i] = v.x;
    a[3 * i + 1] = v.y;
    a[3 * i + 2] = v.z;
  }

  std::size_t count_;
  SimulationBox box_;
  std::array<std::vector<double>, kPropertyCount> arrays_;
};

ParticleSet create_particle_set(long long n, const SimulationBox& box);

double total_charge(const ParticleSet& ps);

// Fixed-length vector of reduction targets (scalar energies, structure factors).
class GlobalAccumulator {
 public:
  explicit GlobalAccumulator(std::size_t length = 1) : values_(length, 0.0) {}

  std::size_t size() const noexcept { return values_.size(); }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }
  double& operator[](std::size_t k) { return values_[k]; }

  void resize(std::size_t length) { values_.assign(length, 0.0); }
  void zero();

 private:
  std::vector<double> values_;
};

enum class Access { read, inc, inc_zero };

struct AccessDescriptor {
  Access mode;
  std::variant<Property, GlobalAccumulator*> target;
};

}  // namespace ewaldmd
