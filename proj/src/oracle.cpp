#include "ewaldmd/oracle.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ewaldmd/error.hpp"

namespace ewaldmd::oracle {

namespace {

void require_neutral(const ParticleSet& ps) {
  const double net = total_charge(ps);
  if (std::abs(net) > kNeutralityTolerance) {
    throw Error(ErrorKind::neutrality_violation, "net charge " + std::to_string(net) + " is not zero");
  }
}

}  // namespace

double direct_lattice_sum(const ParticleSet& ps, int n_shells) {
  if (n_shells < 1) throw Error(ErrorKind::invalid_argument, "need at least one image shell");
  require_neutral(ps);
  const double L = ps.box().edge_length();
  const std::size_t n = ps.size();

  double energy = 0.0;
  for (int nx = -n_shells; nx <= n_shells; ++nx) {
    for (int ny = -n_shells; ny <= n_shells; ++ny) {
      for (int nz = -n_shells; nz <= n_shells; ++nz) {
        double weight = 1.0;
        for (int c : {nx, ny, nz}) {
          if (std::abs(c) == n_shells) weight *= 0.5;
        }
        const Vec3 shift{L * nx, L * ny, L * nz};
        const bool home = nx == 0 && ny == 0 && nz == 0;
        double cell = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double qi = ps.charge(i);
          if (qi == 0.0) continue;
          for (std::size_t j = 0; j < n; ++j) {
            if (home && i == j) continue;
            cell += qi * ps.charge(j) / norm(ps.position(i) - ps.position(j) + shift);
          }
        }
        energy += weight * cell;
      }
    }
  }
  energy *= 0.5;

  Vec3 dipole;
  for (std::size_t i = 0; i < n; ++i) dipole += ps.position(i) * ps.charge(i);
  return energy - 2.0 * std::numbers::pi / (3.0 * ps.box().volume()) * dot(dipole, dipole);
}

Reference direct_ewald_reference(const ParticleSet& ps, const EwaldParams& params) {
  if (ps.size() > kReferenceParticleLimit) {
    throw Error(ErrorKind::too_large_for_oracle,
                std::to_string(ps.size()) + " particles; limit is " + std::to_string(kReferenceParticleLimit));
  }
  require_neutral(ps);
  const SimulationBox& box = ps.box();
  const double L = box.edge_length();
  const std::size_t n = ps.size();
  const double alpha = params.alpha;
  const double sqrt_alpha = std::sqrt(alpha);
  const double gauss = 2.0 * sqrt_alpha / std::sqrt(std::numbers::pi);

  Reference ref;
  ref.forces.assign(n, Vec3{});

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double qq = ps.charge(i) * ps.charge(j);
      if (qq == 0.0) continue;
      const Vec3 base = minimum_image(ps.position(i) - ps.position(j), box);
      for (int nx = -1; nx <= 1; ++nx) {
        for (int ny = -1; ny <= 1; ++ny) {
          for (int nz = -1; nz <= 1; ++nz) {
            const Vec3 d = base + Vec3{L * nx, L * ny, L * nz};
            const double r = norm(d);
            if (r == 0.0) {
              if (i == j) continue;
              throw Error(ErrorKind::coincident_particles, "charged particles at zero separation");
            }
            const double e = std::erfc(sqrt_alpha * r) / r;
            ref.energy += 0.5 * qq * e;
            ref.forces[i] += d * (qq / (r * r) * (e + gauss * std::exp(-alpha * r * r)));
          }
        }
      }
    }
  }

  const double k_c = 2.0 * params.k_cutoff;
  const double unit = 2.0 * std::numbers::pi / L;
  const int m_max = static_cast<int>(std::floor(k_c / unit));
  const double volume = box.volume();
  for (int mx = -m_max; mx <= m_max; ++mx) {
    for (int my = -m_max; my <= m_max; ++my) {
      for (int mz = -m_max; mz <= m_max; ++mz) {
        const Vec3 k{unit * mx, unit * my, unit * mz};
        const double k2 = dot(k, k);
        if (k2 == 0.0 || !(k2 < k_c * k_c)) continue;
        const double c = 4.0 * std::numbers::pi / (volume * k2) * std::exp(-k2 / (4.0 * alpha));
        double s_re = 0.0, s_im = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double phase = dot(k, ps.position(j));
          s_re += ps.charge(j) * std::cos(phase);
          s_im -= ps.charge(j) * std::sin(phase);
        }
        ref.energy += 0.5 * c * (s_re * s_re + s_im * s_im);
        for (std::size_t j = 0; j < n; ++j) {
          const double phase = dot(k, ps.position(j));
          // Im[exp(i k.r_j) * rho_k]
          const double im = std::cos(phase) * s_im + std::sin(phase) * s_re;
          ref.forces[j] += k * (c * ps.charge(j) * im);
        }
      }
    }
  }

  double q2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) q2 += ps.charge(i) * ps.charge(i);
  ref.energy -= std::sqrt(alpha / std::numbers::pi) * q2;
  return ref;
}

std::vector<Vec3> finite_difference_forces(const EnergyFn& energy, const ParticleSet& ps, double h) {
  if (!(h >= 1e-6 && h <= 1e-2)) throw Error(ErrorKind::invalid_argument, "finite-difference step outside [1e-6, 1e-2]");
  ParticleSet work = ps;
  std::vector<Vec3> forces(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const Vec3 r0 = ps.position(i);
    for (int a = 0; a < 3; ++a) {
      Vec3 plus = r0, minus = r0;
      plus[a] += h;
      minus[a] -= h;
      work.set_position(i, wrap_position(plus, ps.box()));
      const double up = energy(work);
      work.set_position(i, wrap_position(minus, ps.box()));
      const double down = energy(work);
      forces[i][a] = -(up - down) / (2.0 * h);
    }
    work.set_position(i, r0);
  }
  return forces;
}

}  // namespace ewaldmd::oracle
