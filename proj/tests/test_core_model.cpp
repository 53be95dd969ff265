#include <doctest.h>

#include <random>

#include "ewaldmd/core_model.hpp"
#include "ewaldmd/error.hpp"
#include "support.hpp"

using namespace ewaldmd;

TEST_CASE("particle set creation") {
  const ParticleSet one = create_particle_set(1, SimulationBox(10.0));
  CHECK(one.size() == 1);
  CHECK(one.position(0) == Vec3{});
  CHECK(one.charge(0) == 0.0);

  const ParticleSet big = create_particle_set(1728, SimulationBox(30.0));
  CHECK(big.data(Property::position).size() == 3 * 1728);
  CHECK(big.data(Property::charge).size() == 1728);
  CHECK(big.consistent());

  try {
    (void)create_particle_set(0, SimulationBox(10.0));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_argument);
  }
}

TEST_CASE("box volume is L cubed") {
  const SimulationBox box(2.5);
  CHECK(box.volume() == 2.5 * 2.5 * 2.5);
  CHECK_THROWS_AS(SimulationBox(0.0), Error);
  CHECK_THROWS_AS(SimulationBox(-1.0), Error);
}

TEST_CASE("wrap examples") {
  const SimulationBox box(10.0);
  CHECK(wrap_position({10.5, 0, 0}, box).x == doctest::Approx(0.5));
  const Vec3 w = wrap_position({-0.1, 5, 5}, box);
  CHECK(w.x == doctest::Approx(9.9));
  CHECK(w.y == 5.0);
  CHECK(wrap_position({3, 3, 3}, box) == Vec3{3, 3, 3});
  // Tiny negatives must not round up onto L itself.
  CHECK(wrap_position({-1e-17, 0, 0}, box).x < 10.0);
}

TEST_CASE("minimum image examples") {
  const SimulationBox box(10.0);
  CHECK(minimum_image({9, 0, 0}, box).x == doctest::Approx(-1.0));
  CHECK(minimum_image({-6, 0, 0}, box).x == doctest::Approx(4.0));
  CHECK(minimum_image({1, 2, 3}, box) == Vec3{1, 2, 3});
  CHECK(minimum_image({5, -5, 0}, box) == Vec3{-5, -5, 0});
}

TEST_CASE("wrap and minimum image shift by whole box lengths") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (const double L : {1.0, 7.3, 30.0}) {
    const SimulationBox box(L);
    for (int t = 0; t < 2000; ++t) {
      const Vec3 r{u(rng), u(rng), u(rng)};
      const Vec3 w = wrap_position(r, box);
      const Vec3 m = minimum_image(r, box);
      for (int a = 0; a < 3; ++a) {
        CHECK(w[a] >= 0.0);
        CHECK(w[a] < L);
        CHECK(m[a] >= -0.5 * L);
        CHECK(m[a] < 0.5 * L);
        const double kw = (r[a] - w[a]) / L;
        const double km = (r[a] - m[a]) / L;
        CHECK(std::abs(kw - std::round(kw)) < 1e-9);
        CHECK(std::abs(km - std::round(km)) < 1e-9);
      }
    }
  }
}

TEST_CASE("total charge") {
  ParticleSet ps(2, SimulationBox(10.0));
  ps.set_charge(0, 1.0);
  ps.set_charge(1, -1.0);
  CHECK(total_charge(ps) == 0.0);
  ps.set_charge(1, 1.0);
  CHECK(total_charge(ps) == 2.0);
  CHECK(total_charge(testing::random_neutral(1728, 30.0, 1)) == 0.0);
}

TEST_CASE("wrap_positions keeps every component inside the box") {
  ParticleSet ps = testing::random_neutral(100, 5.0, 3);
  for (std::size_t i = 0; i < ps.size(); ++i) ps.set_position(i, ps.position(i) * 3.0 - Vec3{7, 7, 7});
  ps.wrap_positions();
  for (const double x : ps.data(Property::position)) {
    CHECK(x >= 0.0);
    CHECK(x < 5.0);
  }
  CHECK(ps.consistent());
}

TEST_CASE("global accumulator") {
  GlobalAccumulator acc(3);
  acc[1] = 2.0;
  acc.zero();
  CHECK(acc[1] == 0.0);
  acc.resize(5);
  CHECK(acc.size() == 5);
}
