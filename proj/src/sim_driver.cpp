#include "ewaldmd/sim_driver.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <string>

#include "ewaldmd/error.hpp"

namespace ewaldmd {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void kick(const LoopEngine& engine, ParticleSet& ps, double half_dt) {
  AccessList access;
  access.particle(Property::force, Access::read)
      .particle(Property::mass, Access::read)
      .particle(Property::velocity, Access::inc);
  auto body = [=](const ParticleView& v) {
    v.inc(Property::velocity, v.get_vec(Property::force) * (half_dt / v.get(Property::mass)));
  };
  engine.execute_particle_loop(ParticleKernel<decltype(body)>{std::move(access), body}, ps);
}

void drift(const LoopEngine& engine, ParticleSet& ps, double dt) {
  AccessList access;
  access.particle(Property::velocity, Access::read).particle(Property::position, Access::inc);
  auto body = [=](const ParticleView& v) { v.inc(Property::position, v.get_vec(Property::velocity) * dt); };
  engine.execute_particle_loop(ParticleKernel<decltype(body)>{std::move(access), body}, ps);
  ps.wrap_positions();
}

}  // namespace

ParticleSet init_rocksalt(int cells_per_dim, double spacing) {
  if (cells_per_dim < 1) {
    throw Error(ErrorKind::invalid_lattice, "need at least one rock-salt cell per axis");
  }
  if (!(spacing > 0.0)) throw Error(ErrorKind::invalid_argument, "lattice spacing must be positive");
  const int sites = 2 * cells_per_dim;
  const SimulationBox box(sites * spacing);
  ParticleSet ps(static_cast<std::size_t>(sites) * sites * sites, box);
  std::size_t i = 0;
  for (int ix = 0; ix < sites; ++ix) {
    for (int iy = 0; iy < sites; ++iy) {
      for (int iz = 0; iz < sites; ++iz, ++i) {
        const bool cation = (ix + iy + iz) % 2 == 0;
        ps.set_position(i, Vec3{ix * spacing, iy * spacing, iz * spacing});
        ps.set_charge(i, cation ? 1.0 : -1.0);
        ps.set_mass(i, cation ? kSodiumMass : kChlorideMass);
      }
    }
  }
  return ps;
}

ParticleSet build_system(const SimConfig& config) {
  const long long n = config.n_particles;
  const auto sites = static_cast<long long>(std::llround(std::cbrt(static_cast<double>(n))));
  if (n < 1 || sites * sites * sites != n || sites % 2 != 0) {
    throw Error(ErrorKind::invalid_lattice,
                "rock-salt systems need n = (2m)^3 particles, got " + std::to_string(n));
  }
  return init_rocksalt(static_cast<int>(sites / 2), config.box / static_cast<double>(sites));
}

void assign_velocities(ParticleSet& ps, double scale, std::uint64_t seed) {
  ps.zero(Property::velocity);
  if (scale <= 0.0 || ps.size() == 0) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, scale);
  Vec3 momentum;
  double total_mass = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const Vec3 v{gauss(rng), gauss(rng), gauss(rng)};
    ps.set_velocity(i, v);
    momentum += v * ps.mass(i);
    total_mass += ps.mass(i);
  }
  const Vec3 shift = momentum * (1.0 / total_mass);
  for (std::size_t i = 0; i < ps.size(); ++i) ps.set_velocity(i, ps.velocity(i) - shift);
}

void jitter_positions(ParticleSet& ps, double amplitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> shift(-amplitude, amplitude);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const Vec3 d{shift(rng), shift(rng), shift(rng)};
    ps.set_position(i, wrap_position(ps.position(i) + d, ps.box()));
  }
}

ParticleSet replicate(const ParticleSet& ps, int factor) {
  if (factor < 1) throw Error(ErrorKind::invalid_argument, "replication factor must be at least 1");
  const double L = ps.box().edge_length();
  const auto copies = static_cast<std::size_t>(factor) * factor * factor;
  ParticleSet out(ps.size() * copies, SimulationBox(L * factor));
  std::size_t k = 0;
  for (int a = 0; a < factor; ++a) {
    for (int b = 0; b < factor; ++b) {
      for (int c = 0; c < factor; ++c) {
        const Vec3 shift{L * a, L * b, L * c};
        for (std::size_t i = 0; i < ps.size(); ++i, ++k) {
          out.set_position(k, ps.position(i) + shift);
          out.set_charge(k, ps.charge(i));
          out.set_mass(k, ps.mass(i));
          out.set_velocity(k, ps.velocity(i));
          out.set_force(k, ps.force(i));
        }
      }
    }
  }
  return out;
}

double kinetic_energy(const ParticleSet& ps) {
  double ke = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const Vec3 v = ps.velocity(i);
    ke += 0.5 * ps.mass(i) * dot(v, v);
  }
  return ke;
}

double velocity_verlet_step(const LoopEngine& engine, ParticleSet& ps, double dt, const ForceAssembler& assemble) {
  kick(engine, ps, 0.5 * dt);
  drift(engine, ps, dt);
  const double potential = assemble(ps);
  kick(engine, ps, 0.5 * dt);
  return potential;
}

ForceField::ForceField(const SimConfig& config, const SimulationBox& box, long long n) : box_(box) {
  if (config.coulomb) coulomb_.emplace(box, choose_parameters(n, box, config.tolerance, config.ewald));
  if (config.lj) lj_ = config.lj_params;
}

PotentialEnergy ForceField::assemble(const LoopEngine& engine, ParticleSet& ps) {
  PotentialEnergy e;
  auto t0 = Clock::now();
  ps.zero(Property::force);
  timings_.zeroing = seconds_since(t0);

  if (coulomb_) {
    t0 = Clock::now();
    const CellList cl = build_cell_list(ps, box_, coulomb_->params().r_cutoff);
    const double t_cells = seconds_since(t0);
    e.coulomb = coulomb_->compute(engine, ps, cl).total();
    const CoulombTimings& ct = coulomb_->last_timings();
    timings_.short_range = ct.short_range + t_cells;
    timings_.rho_hat = ct.rho_hat;
    timings_.long_range = ct.long_range;
  }
  if (lj_) {
    t0 = Clock::now();
    const CellList cl = build_cell_list(ps, box_, lj_->cutoff);
    e.lj = lennard_jones(engine, ps, cl, *lj_);
    timings_.lj = seconds_since(t0);
  }
  return e;
}

RunMetrics run(const SimConfig& config) {
  ParticleSet ps = build_system(config);
  assign_velocities(ps, config.velocity_scale, config.seed);
  return run(config, ps);
}

RunMetrics run(const SimConfig& config, ParticleSet& ps) {
  if (config.n_steps < 0) throw Error(ErrorKind::invalid_argument, "n_steps must be non-negative");
  if (!(config.dt > 0.0)) throw Error(ErrorKind::invalid_argument, "dt must be positive");

  RunMetrics metrics;
  const LoopEngine engine(resolve_thread_count(config.threads));
  metrics.workers = engine.workers();

  auto t0 = Clock::now();
  ps.wrap_positions();
  ForceField field(config, ps.box(), static_cast<long long>(ps.size()));
  if (field.coulomb()) {
    metrics.params = field.coulomb()->params();
    metrics.k_vectors = field.coulomb()->reciprocal().count();
  }
  PotentialEnergy pe = field.assemble(engine, ps);
  metrics.setup_seconds = seconds_since(t0);
  metrics.initial.e_coulomb = pe.coulomb;
  metrics.initial.e_lj = pe.lj;
  metrics.initial.e_kinetic = kinetic_energy(ps);
  const double e0 = metrics.initial.e_total();

  double t_assemble = 0.0;
  ForceAssembler assemble = [&](ParticleSet& p) {
    const auto ta = Clock::now();
    pe = field.assemble(engine, p);
    t_assemble = seconds_since(ta);
    return pe.total();
  };
  metrics.steps.reserve(static_cast<std::size_t>(config.n_steps));
  for (long long step = 0; step < config.n_steps; ++step) {
    t0 = Clock::now();
    velocity_verlet_step(engine, ps, config.dt, assemble);
    StepRecord rec;
    rec.wall = seconds_since(t0);
    const ForceTimings& ft = field.last_timings();
    rec.t_short_range = ft.short_range;
    rec.t_rho_hat = ft.rho_hat;
    rec.t_long_range = ft.long_range;
    rec.t_lj = ft.lj;
    // Kicks, drift, wrap and force zeroing.
    rec.t_integrate = rec.wall - t_assemble + ft.zeroing;
    rec.e_coulomb = pe.coulomb;
    rec.e_lj = pe.lj;
    rec.e_kinetic = kinetic_energy(ps);
    if (e0 != 0.0) {
      metrics.max_relative_drift = std::max(metrics.max_relative_drift, std::abs(rec.e_total() - e0) / std::abs(e0));
    }
    metrics.steps.push_back(rec);
  }
  return metrics;
}

}  // namespace ewaldmd
