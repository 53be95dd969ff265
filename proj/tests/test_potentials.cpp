#include <doctest.h>

#include <cmath>
#include <random>

#include "ewaldmd/error.hpp"
#include "ewaldmd/potentials.hpp"
#include "support.hpp"

using namespace ewaldmd;

TEST_CASE("12-6 root and minimum") {
  const LJParams p;
  CHECK(lj_energy_unshifted(p.sigma, p) == doctest::Approx(0.0));
  CHECK(lj_pair({p.sigma, 0, 0}, p).force.x > 0.0);  // repulsive: pushes i away from j

  const double r_min = std::pow(2.0, 1.0 / 6.0) * p.sigma;
  CHECK(lj_energy_unshifted(r_min, p) == doctest::Approx(-p.epsilon).epsilon(1e-14));
  CHECK(std::abs(lj_pair({0, r_min, 0}, p).force.y) < 1e-14);
}

TEST_CASE("shifted energy vanishes at the cutoff") {
  for (const LJParams p : {LJParams{}, LJParams{0.3, 1.0, 2.5}, LJParams{2.0, 3.4, std::pow(2.0, 1.0 / 6.0) * 3.4}}) {
    const double below = std::nextafter(p.cutoff, 0.0);
    CHECK(std::abs(lj_pair({below, 0, 0}, p).energy) < 1e-12);
  }
}

TEST_CASE("force is minus the energy gradient") {
  const LJParams p;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-3.5, 3.5);
  for (int t = 0; t < 50; ++t) {
    const Vec3 d{u(rng), u(rng), u(rng)};
    if (norm(d) < 2.0 || norm(d) > p.cutoff - 0.01) continue;
    const PairTerm term = lj_pair(d, p);
    const double h = 1e-5;
    for (int a = 0; a < 3; ++a) {
      Vec3 plus = d, minus = d;
      plus[a] += h;
      minus[a] -= h;
      const double fd = -(lj_pair(plus, p).energy - lj_pair(minus, p).energy) / (2 * h);
      CHECK(std::abs(term.force[a] - fd) <= 1e-6 * std::max(std::abs(fd), 1e-3));
    }
  }
}

TEST_CASE("ordered visits are antisymmetric") {
  const LJParams p;
  const Vec3 d{1.1, -2.3, 0.4};
  CHECK(lj_pair(d, p).force == -lj_pair(-d, p).force);
  CHECK(lj_pair(d, p).energy == lj_pair(-d, p).energy);
  try {
    (void)lj_pair({}, p);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::coincident_particles);
  }
}

TEST_CASE("pair loop total against all pairs") {
  const LJParams p;
  ParticleSet ps = testing::random_neutral(120, 16.0, 8);
  // Spread the particles out so the repulsive core stays moderate.
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const std::size_t x = i % 5, y = (i / 5) % 5, z = i / 25;
    ps.set_position(i, wrap_position(Vec3{3.2 * x, 3.2 * y, 3.2 * z} + ps.position(i) * 0.05, ps.box()));
  }
  const CellList cl = build_cell_list(ps, ps.box(), p.cutoff);
  const double u = lennard_jones(LoopEngine(2), ps, cl, p);

  double ref = 0.0;
  std::vector<Vec3> f(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    for (std::size_t j = i + 1; j < ps.size(); ++j) {
      const Vec3 d = minimum_image(ps.position(i) - ps.position(j), ps.box());
      if (norm(d) >= p.cutoff) continue;
      const PairTerm t = lj_pair(d, p);
      ref += t.energy;
      f[i] += t.force;
      f[j] -= t.force;
    }
  }
  CHECK(testing::rel(u, ref) < 1e-12);
  for (std::size_t i = 0; i < ps.size(); ++i) CHECK(norm(ps.force(i) - f[i]) < 1e-10 * (1.0 + norm(f[i])));

  const CellList wrong = build_cell_list(ps, ps.box(), 5.0);
  CHECK_THROWS_AS(lennard_jones(LoopEngine(), ps, wrong, p), Error);
}
