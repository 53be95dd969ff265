#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "ewaldmd/error.hpp"
#include "ewaldmd/ewald.hpp"
#include "ewaldmd/oracle.hpp"
#include "ewaldmd/verify.hpp"
#include "support.hpp"

using namespace ewaldmd;
using std::numbers::pi;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::invalid_argument;
}

struct NaiveReciprocal {
  std::vector<std::complex<double>> rho;  // over the full k ball, both signs
  std::vector<Vec3> k;
  std::vector<double> c;
  double energy = 0.0;
  std::vector<Vec3> forces;
};

// Full-space sums with explicit exponentials; no half-space or recurrences.
NaiveReciprocal naive_reciprocal(const ParticleSet& ps, double alpha, double k_c) {
  NaiveReciprocal out;
  const double L = ps.box().edge_length();
  const int M = static_cast<int>(k_c * L / (2 * pi)) + 1;
  for (int a = -M; a <= M; ++a) {
    for (int b = -M; b <= M; ++b) {
      for (int d = -M; d <= M; ++d) {
        const Vec3 k = Vec3{double(a), double(b), double(d)} * (2 * pi / L);
        const double k2 = dot(k, k);
        if (k2 == 0.0 || k2 >= k_c * k_c) continue;
        std::complex<double> rho = 0.0;
        for (std::size_t j = 0; j < ps.size(); ++j) rho += ps.charge(j) * std::polar(1.0, -dot(k, ps.position(j)));
        out.k.push_back(k);
        out.rho.push_back(rho);
        out.c.push_back(4 * pi / (ps.box().volume() * k2) * std::exp(-k2 / (4 * alpha)));
      }
    }
  }
  out.forces.assign(ps.size(), Vec3{});
  for (std::size_t m = 0; m < out.k.size(); ++m) {
    out.energy += 0.5 * out.c[m] * std::norm(out.rho[m]);
    for (std::size_t j = 0; j < ps.size(); ++j) {
      const double w = std::imag(std::polar(1.0, dot(out.k[m], ps.position(j))) * out.rho[m]);
      out.forces[j] += out.k[m] * (out.c[m] * ps.charge(j) * w);
    }
  }
  return out;
}

ParticleSet random_charges(std::size_t n, double L, std::uint64_t seed) {
  ParticleSet ps = testing::random_neutral(n, L, seed);
  std::mt19937_64 rng(seed + 1);
  std::uniform_real_distribution<double> q(-1.0, 1.0);
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    ps.set_charge(i, q(rng));
    sum += ps.charge(i);
  }
  ps.set_charge(n - 1, -sum);
  return ps;
}

}  // namespace

TEST_CASE("parameter selection") {
  SUBCASE("1728 ions in a 30 Angstrom box") {
    const EwaldParams p = choose_parameters(1728, SimulationBox(30.0), 1e-6);
    CHECK(satisfies_truncation(p));
    CHECK(p.r_cutoff <= 15.0);
    // Same order of magnitude as the published tuned (0.062, 13.5).
    CHECK(p.alpha > 0.0062);
    CHECK(p.alpha < 0.62);
    CHECK(p.r_cutoff > 1.35);
  }
  SUBCASE("fixed cutoff of 19 Angstrom") {
    ParameterOverrides o;
    o.r_cutoff = 19.0;
    const EwaldParams p = choose_parameters(32768, SimulationBox(80.0), 1e-6, o);
    const double s = std::sqrt(-std::log(1e-6));
    CHECK(p.r_cutoff == 19.0);
    CHECK(p.alpha == doctest::Approx((s / 19.0) * (s / 19.0)).epsilon(1e-12));
    CHECK(p.alpha == doctest::Approx(0.0383).epsilon(2e-3));
    CHECK(p.k_cutoff == doctest::Approx(2 * s * std::sqrt(p.alpha)).epsilon(1e-12));
    CHECK(satisfies_truncation(p));
  }
  SUBCASE("auto rule away from the clamp") {
    const SimulationBox box(50.0);
    const EwaldParams p = choose_parameters(8000, box, 1e-6);
    CHECK(p.alpha == doctest::Approx(pi * std::cbrt(8000.0 / (box.volume() * box.volume()))).epsilon(1e-12));
    CHECK(p.r_cutoff == doctest::Approx(std::sqrt(-std::log(1e-6) / p.alpha)).epsilon(1e-12));
  }
  SUBCASE("loose tolerance") {
    const EwaldParams p = choose_parameters(2, SimulationBox(10.0), 0.5);
    CHECK(satisfies_truncation(p));
    CHECK(p.r_cutoff <= 5.0);
  }
  SUBCASE("errors") {
    CHECK(kind_of([] { choose_parameters(64, SimulationBox(10.0), 0.0); }) == ErrorKind::invalid_argument);
    CHECK(kind_of([] { choose_parameters(64, SimulationBox(10.0), 1.0); }) == ErrorKind::invalid_argument);
    ParameterOverrides tiny_alpha;
    tiny_alpha.alpha = 1e-4;
    CHECK(kind_of([&] { choose_parameters(64, SimulationBox(10.0), 1e-6, tiny_alpha); }) == ErrorKind::box_too_small);
  }
}

TEST_CASE("truncation invariants hold across tolerances and sizes") {
  for (const double eps : {1e-3, 1e-6, 1e-9}) {
    for (const long long n : {8LL, 64LL, 1728LL, 32768LL}) {
      const double L = 2.5 * std::cbrt(static_cast<double>(n));
      const EwaldParams p = choose_parameters(n, SimulationBox(L), eps);
      CAPTURE(eps);
      CAPTURE(n);
      CHECK(satisfies_truncation(p));
      CHECK(p.r_cutoff <= 0.5 * L);
    }
  }
}

TEST_CASE("reciprocal vectors") {
  const SimulationBox box(2 * pi);
  // k_c = 1.5 also admits the twelve |m| = sqrt(2) vectors; 1.2 keeps only the axes.
  const ReciprocalSpace axes = enumerate_kvectors(box, EwaldParams{1e12, 1.0, 1.2, 1e-6});
  CHECK(axes.represented_count() == 6);
  CHECK(axes.count() == 3);
  for (const double c : axes.coeff()) CHECK(c == doctest::Approx(1.0 / (2 * pi * pi)).epsilon(1e-10));
  const ReciprocalSpace rs = enumerate_kvectors(box, EwaldParams{1e12, 1.0, 1.5, 1e-6});
  CHECK(rs.represented_count() == 18);
  for (std::size_t i = 0; i < rs.count(); ++i) {
    const double k2 = dot(rs.k(i), rs.k(i));
    CHECK(rs.coeff()[i] == doctest::Approx(1.0 / (2 * pi * pi * k2)).epsilon(1e-10));
  }

  CHECK(kind_of([&] { enumerate_kvectors(box, EwaldParams{1.0, 1.0, 0.9, 1e-6}); }) == ErrorKind::kspace_empty);

  // Stored vectors are lattice vectors inside the ball, one per +-k pair.
  const SimulationBox b(11.0);
  const EwaldParams p{0.3, 5.0, 2.7, 1e-6};
  const ReciprocalSpace r = enumerate_kvectors(b, p);
  std::size_t brute = 0;
  for (int x = -10; x <= 10; ++x)
    for (int y = -10; y <= 10; ++y)
      for (int z = -10; z <= 10; ++z) {
        const double k2 = (x * x + y * y + z * z) * std::pow(2 * pi / 11.0, 2);
        if (k2 > 0 && k2 < p.k_cutoff * p.k_cutoff) ++brute;
      }
  CHECK(r.represented_count() == brute);
  for (std::size_t i = 0; i < r.count(); ++i) {
    const Vec3 k = r.k(i);
    CHECK(norm(k) < p.k_cutoff);
    const Vec3 m = k * (11.0 / (2 * pi));
    CHECK(std::abs(m.x - std::round(m.x)) < 1e-12);
    CHECK(r.coeff()[i] > 0.0);
    const bool positive = m.x > 0.5 || (std::abs(m.x) < 0.5 && (m.y > 0.5 || (std::abs(m.y) < 0.5 && m.z > 0.5)));
    CHECK(positive);
  }
}

TEST_CASE("real-space pair term") {
  const auto t = short_range_pair(1.0, -1.0, {1, 0, 0}, 0.1);
  CHECK(t.energy == doctest::Approx(-0.65472).epsilon(1e-5));
  CHECK(t.energy == doctest::Approx(-std::erfc(std::sqrt(0.1))).epsilon(1e-13));
  // Attractive: force on i points toward j.
  CHECK(t.force.x < 0.0);
  const double r = 1.0, a = 0.1;
  const double expected = -(std::erfc(std::sqrt(a) * r) / r + 2 * std::sqrt(a / pi) * std::exp(-a * r * r)) / (r * r);
  CHECK(t.force.x == doctest::Approx(expected).epsilon(1e-13));

  const auto zero = short_range_pair(1.0, 0.0, {0.3, 0.2, 0.1}, 0.5);
  CHECK(zero.energy == 0.0);
  CHECK(zero.force == Vec3{});

  const Vec3 d{0.4, -1.1, 0.7};
  const auto ij = short_range_pair(0.7, -0.3, d, 0.2);
  const auto ji = short_range_pair(-0.3, 0.7, -d, 0.2);
  CHECK(ij.force == -ji.force);
  CHECK(kind_of([] { short_range_pair(1.0, 1.0, {}, 0.1); }) == ErrorKind::coincident_particles);
}

TEST_CASE("real-space pair term against direct erfc over a range of distances") {
  for (const double a : {0.01, 0.06, 0.5}) {
    for (double r = 0.05; r < 30.0; r *= 1.13) {
      const auto t = short_range_pair(1.0, 1.0, {r, 0, 0}, a);
      const double g = std::erfc(std::sqrt(a) * r) / r;
      const double f = (g + 2 * std::sqrt(a / pi) * std::exp(-a * r * r)) / r;
      CAPTURE(a * r * r);
      // Relative accuracy where the screening leaves something to resolve;
      // beyond that, accuracy measured against the bare Coulomb term.
      if (a * r * r < 16.0) {
        CHECK(testing::rel(t.energy, g) < 1e-12);
        CHECK(testing::rel(t.force.x, f) < 1e-12);
      }
      CHECK(std::abs(t.energy - g) < 1e-12 / r);
      CHECK(std::abs(t.force.x - f) < 1e-12 / (r * r));
    }
  }
}

TEST_CASE("self energy") {
  ParticleSet one(1, SimulationBox(10.0));
  one.set_charge(0, 1.0);
  CHECK(self_energy(one, EwaldParams{pi, 1, 1, 1e-6}) == doctest::Approx(-1.0));
  ParticleSet two(2, SimulationBox(10.0));
  two.set_charge(0, 1.0);
  two.set_charge(1, -1.0);
  CHECK(self_energy(two, EwaldParams{pi, 1, 1, 1e-6}) == doctest::Approx(-2.0));
  CHECK(self_energy(ParticleSet(3, SimulationBox(10.0)), EwaldParams{pi, 1, 1, 1e-6}) == 0.0);
}

TEST_CASE("structure factor") {
  const LoopEngine engine(2);
  const EwaldParams p{0.3, 4.0, 3.0, 1e-6};

  ParticleSet origin(1, SimulationBox(9.0));
  origin.set_charge(0, 1.0);
  ReciprocalSpace rs = enumerate_kvectors(origin.box(), p);
  compute_rho_hat(engine, origin, rs);
  for (std::size_t k = 0; k < rs.count(); ++k) {
    CHECK(rs.rho_re(k) == doctest::Approx(1.0));
    CHECK(rs.rho_im(k) == doctest::Approx(0.0));
  }

  ParticleSet pair(2, SimulationBox(9.0));
  pair.set_position(0, {1.3, 2.2, 7.7});
  pair.set_position(1, {1.3, 2.2, 7.7});
  pair.set_charge(0, 1.0);
  pair.set_charge(1, -1.0);
  compute_rho_hat(engine, pair, rs);
  for (std::size_t k = 0; k < rs.count(); ++k) {
    CHECK(std::abs(rs.rho_re(k)) < 1e-15);
    CHECK(std::abs(rs.rho_im(k)) < 1e-15);
  }

  ParticleSet ps = random_charges(32, 9.0, 17);
  compute_rho_hat(engine, ps, rs);
  double scale = 0.0;
  for (std::size_t k = 0; k < rs.count(); ++k) scale = std::max(scale, std::hypot(rs.rho_re(k), rs.rho_im(k)));
  for (std::size_t k = 0; k < rs.count(); ++k) {
    std::complex<double> direct = 0.0;
    for (std::size_t j = 0; j < ps.size(); ++j) direct += ps.charge(j) * std::polar(1.0, -dot(rs.k(k), ps.position(j)));
    CHECK(std::abs(rs.rho_re(k) - direct.real()) < 1e-12 * scale);
    CHECK(std::abs(rs.rho_im(k) - direct.imag()) < 1e-12 * scale);
  }
}

TEST_CASE("long-range energy and forces against a naive double loop") {
  const LoopEngine engine(3);
  const EwaldParams p{0.25, 4.5, 2.6, 1e-6};

  SUBCASE("zero charges") {
    ParticleSet ps(4, SimulationBox(9.0));
    ReciprocalSpace rs = enumerate_kvectors(ps.box(), p);
    compute_rho_hat(engine, ps, rs);
    CHECK(long_range_energy_forces(engine, ps, rs).energy == 0.0);
    for (const double f : ps.data(Property::force)) CHECK(f == 0.0);
  }
  SUBCASE("single charge") {
    ParticleSet ps(1, SimulationBox(9.0));
    ps.set_charge(0, 1.0);
    ps.set_position(0, {2.0, 3.0, 4.0});
    ReciprocalSpace rs = enumerate_kvectors(ps.box(), p);
    compute_rho_hat(engine, ps, rs);
    double half_sum = 0.0;
    for (const double c : rs.coeff()) half_sum += c;  // (1/2) sum over both signs
    CHECK(testing::rel(long_range_energy_forces(engine, ps, rs).energy, half_sum) < 1e-12);
  }
  SUBCASE("random neutral system") {
    ParticleSet ps = random_charges(32, 9.0, 5);
    ReciprocalSpace rs = enumerate_kvectors(ps.box(), p);
    compute_rho_hat(engine, ps, rs);
    const LongRangeResult lr = long_range_energy_forces(engine, ps, rs);
    const NaiveReciprocal naive = naive_reciprocal(ps, p.alpha, p.k_cutoff);
    CHECK(naive.k.size() == rs.represented_count());
    CHECK(testing::rel(lr.energy, naive.energy) < 1e-12);
    CHECK(std::abs(lr.imag_residue) < 1e-12 * std::abs(lr.energy));
    double fmax = 0.0;
    for (const Vec3& f : naive.forces) fmax = std::max(fmax, norm(f));
    for (std::size_t j = 0; j < ps.size(); ++j) {
      CHECK(norm(ps.force(j) - naive.forces[j]) < 1e-12 * fmax);
    }
  }
}

TEST_CASE("total Coulomb rejects a charged system") {
  ParticleSet ps(2, SimulationBox(10.0));
  ps.set_position(1, {1, 1, 1});
  ps.set_charge(0, 1.0);
  ps.set_charge(1, 1.0);
  EwaldCoulomb ewald(ps.box(), choose_parameters(2, ps.box(), 1e-6));
  CHECK(kind_of([&] { ewald.compute(LoopEngine(), ps); }) == ErrorKind::neutrality_violation);
}

TEST_CASE("dipole forces match finite differences") {
  const double L = 12.0;
  ParticleSet ps(2, SimulationBox(L));
  ps.set_position(0, {1.0, 2.0, 3.0});
  ps.set_position(1, {1.0 + L / 4, 2.0, 3.0});
  ps.set_charge(0, 1.0);
  ps.set_charge(1, -1.0);
  const LoopEngine engine;
  const EwaldParams p = choose_parameters(2, ps.box(), kFiniteDifferenceTolerance);
  const CoulombEvaluation analytic = evaluate_coulomb(engine, ps, p);
  const auto fd = oracle::finite_difference_forces(
      [&](ParticleSet& q) { return evaluate_coulomb(engine, q, p).energy.total(); }, ps, 1e-4);
  CHECK(force_mismatch(analytic.forces, fd) < 1e-4);
  // Attraction along +x on the first charge.
  CHECK(analytic.forces[0].x > 0.0);
}

TEST_CASE("Ewald energy matches the direct reference") {
  const LoopEngine engine(2);
  for (const std::uint64_t seed : {1u, 2u, 3u}) {
    const ParticleSet ps = random_charges(16, 8.0, seed);
    const EwaldParams p = choose_parameters(16, ps.box(), 1e-6);
    const CoulombEvaluation e = evaluate_coulomb(engine, ps, p);
    const oracle::Reference ref = oracle::direct_ewald_reference(ps, p);
    CAPTURE(seed);
    CHECK(testing::rel(e.energy.total(), ref.energy) < 1e-5);
  }
}

TEST_CASE("invariances of the assembled energy") {
  const LoopEngine engine(2);
  const ParticleSet ps = random_charges(48, 10.0, 77);
  const EwaldParams p = choose_parameters(48, ps.box(), 1e-6);
  const CoulombEvaluation e = evaluate_coulomb(engine, ps, p);

  SUBCASE("translation") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-25.0, 25.0);
    for (int t = 0; t < 5; ++t) {
      ParticleSet moved = ps;
      const Vec3 shift{u(rng), u(rng), u(rng)};
      for (std::size_t i = 0; i < moved.size(); ++i) moved.set_position(i, moved.position(i) + shift);
      moved.wrap_positions();
      CHECK(testing::rel(evaluate_coulomb(engine, moved, p).energy.total(), e.energy.total()) < 1e-10);
    }
  }
  SUBCASE("momentum") {
    Vec3 sum;
    double fmax = 0.0;
    for (const Vec3& f : e.forces) {
      sum += f;
      fmax = std::max(fmax, norm(f));
    }
    CHECK(norm(sum) < 1e-8 * fmax * static_cast<double>(ps.size()));
  }
  SUBCASE("realness") {
    CHECK(std::abs(e.energy.long_range_imag) < 1e-12 * std::abs(e.energy.long_range));
  }
  SUBCASE("splitting parameter") {
    const double u0 = e.energy.total();
    for (const double factor : {0.5, 2.0}) {
      const double u = coulomb_energy_with_alpha(engine, ps, 1e-6, p.alpha * factor);
      CAPTURE(factor);
      CHECK(testing::rel(u, u0) < 5e-6);
    }
  }
}
