#include "ewaldmd/ewald.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <string>
#include <tuple>
#include <utility>

#include "ewaldmd/error.hpp"
#include "ewaldmd/special.hpp"

namespace ewaldmd {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// erfc(sqrt(alpha) r) / r and the radial force factor
// (erfc(sqrt(alpha) r) / r + 2 sqrt(alpha / pi) exp(-alpha r^2)) / r^2.
class ScreenedCoulomb {
 public:
  explicit ScreenedCoulomb(double alpha)
      : alpha_(alpha), sqrt_alpha_(std::sqrt(alpha)), alpha_32_(alpha * std::sqrt(alpha)),
        table_(ScreenedCoulombTable::instance()) {}

  std::pair<double, double> operator()(double r2) const {
    const double u = alpha_ * r2;
    const auto [g, f] = ScreenedCoulombTable::covers(u) ? table_(u) : screened_coulomb_exact(u);
    return {sqrt_alpha_ * g, alpha_32_ * f};
  }

 private:
  double alpha_;
  double sqrt_alpha_;
  double alpha_32_;
  const ScreenedCoulombTable& table_;
};

bool real_tail_ok(double alpha, double r_c, double eps) {
  return std::erfc(std::sqrt(alpha) * r_c) / r_c <= eps;
}

// exp(i m theta_a) for m in [-M, M] on each axis, built by complex recurrence
// from a single sin/cos per axis.
class PhaseTable {
 public:
  void fill(const Vec3& r, double unit, int max_mode) {
    m_ = max_mode;
    const std::size_t width = 2 * static_cast<std::size_t>(m_) + 1;
    re_.resize(3 * width);
    im_.resize(3 * width);
    for (int a = 0; a < 3; ++a) {
      double* re = re_.data() + a * width + m_;
      double* im = im_.data() + a * width + m_;
      const double c1 = std::cos(unit * r[a]);
      const double s1 = std::sin(unit * r[a]);
      re[0] = 1.0;
      im[0] = 0.0;
      for (int m = 1; m <= m_; ++m) {
        re[m] = re[m - 1] * c1 - im[m - 1] * s1;
        im[m] = im[m - 1] * c1 + re[m - 1] * s1;
        re[-m] = re[m];
        im[-m] = -im[m];
      }
    }
  }
  // Pointers indexable by m in [-M, M].
  const double* re(int axis) const { return re_.data() + axis * (2 * m_ + 1) + m_; }
  const double* im(int axis) const { return im_.data() + axis * (2 * m_ + 1) + m_; }

 private:
  int m_ = 0;
  std::vector<double> re_, im_;
};

PhaseTable& scratch_table() {
  thread_local PhaseTable table;
  return table;
}

}  // namespace

bool satisfies_truncation(const EwaldParams& p) {
  if (!(p.alpha > 0.0 && p.r_cutoff > 0.0 && p.k_cutoff > 0.0)) return false;
  return real_tail_ok(p.alpha, p.r_cutoff, p.tolerance) &&
         std::exp(-p.k_cutoff * p.k_cutoff / (4.0 * p.alpha)) <= p.tolerance;
}

EwaldParams choose_parameters(long long n, const SimulationBox& box, double epsilon,
                              const ParameterOverrides& overrides) {
  if (n < 2) throw Error(ErrorKind::invalid_argument, "need at least two particles");
  if (!(epsilon > 1e-12 && epsilon < 1.0)) {
    throw Error(ErrorKind::invalid_argument, "tolerance must lie in (1e-12, 1)");
  }
  if (overrides.alpha && !(*overrides.alpha > 0.0)) throw Error(ErrorKind::invalid_argument, "alpha must be positive");
  if (overrides.r_cutoff && !(*overrides.r_cutoff > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "r_cutoff must be positive");
  }

  const double half_box = 0.5 * box.edge_length();
  const double s_k = std::sqrt(-std::log(epsilon));
  const double alpha_auto = std::numbers::pi * std::cbrt(static_cast<double>(n) / (box.volume() * box.volume()));

  // Returns (alpha, r_c) for a given real-space exponent s.
  auto derive = [&](double s) -> std::pair<double, double> {
    if (overrides.alpha && overrides.r_cutoff) return {*overrides.alpha, *overrides.r_cutoff};
    if (overrides.alpha) return {*overrides.alpha, s / std::sqrt(*overrides.alpha)};
    double r_c = overrides.r_cutoff ? *overrides.r_cutoff : s / std::sqrt(alpha_auto);
    if (!overrides.r_cutoff && r_c <= half_box) return {alpha_auto, r_c};
    r_c = std::min(r_c, half_box);
    return {(s / r_c) * (s / r_c), r_c};
  };

  double s = s_k;
  auto [alpha, r_c] = derive(s);
  // erfc(s)/r_c can exceed eps when r_c is below ~1 Angstrom; raise s until it doesn't.
  for (int iter = 0; !real_tail_ok(alpha, r_c, epsilon); ++iter) {
    if ((overrides.alpha && overrides.r_cutoff) || iter > 5000) {
      throw Error(ErrorKind::invalid_argument, "alpha and r_cutoff do not meet the real-space tolerance");
    }
    s *= 1.001;
    std::tie(alpha, r_c) = derive(s);
  }
  if (r_c > half_box) {
    throw Error(ErrorKind::box_too_small, "alpha " + std::to_string(alpha) + " needs r_c = " + std::to_string(r_c) +
                                              " beyond half the box edge " + std::to_string(half_box));
  }

  double k_c = 2.0 * s_k * std::sqrt(alpha);
  while (std::exp(-k_c * k_c / (4.0 * alpha)) > epsilon) k_c = std::nextafter(k_c, 2.0 * k_c);
  return EwaldParams{alpha, r_c, k_c, epsilon};
}

ReciprocalSpace enumerate_kvectors(const SimulationBox& box, const EwaldParams& params) {
  ReciprocalSpace rs;
  const double L = box.edge_length();
  rs.unit_ = 2.0 * std::numbers::pi / L;
  rs.max_mode_ = static_cast<int>(std::floor(params.k_cutoff / rs.unit_));
  const int M = rs.max_mode_;
  const double kc2 = params.k_cutoff * params.k_cutoff;
  const double pref = 4.0 * std::numbers::pi / box.volume();

  for (int mx = 0; mx <= M; ++mx) {
    for (int my = (mx == 0 ? 0 : -M); my <= M; ++my) {
      const int mz_lo = (mx == 0 && my == 0) ? 1 : -M;
      ReciprocalSpace::Row row{mx, my, 0, 0, rs.coeff_.size()};
      bool open = false;
      for (int mz = mz_lo; mz <= M; ++mz) {
        const Vec3 k{rs.unit_ * mx, rs.unit_ * my, rs.unit_ * mz};
        const double k2 = dot(k, k);
        if (!(k2 < kc2)) continue;
        if (!open) {
          row.mz_begin = mz;
          open = true;
        }
        row.mz_end = mz + 1;
        rs.kx_.push_back(k.x);
        rs.ky_.push_back(k.y);
        rs.kz_.push_back(k.z);
        rs.coeff_.push_back(pref / k2 * std::exp(-k2 / (4.0 * params.alpha)));
      }
      if (open) rs.rows_.push_back(row);
    }
  }
  if (rs.coeff_.empty()) {
    throw Error(ErrorKind::kspace_empty, "no reciprocal vectors below k_c = " + std::to_string(params.k_cutoff));
  }
  rs.rho_hat_.resize(2 * rs.coeff_.size());
  return rs;
}

using ReciprocalRow = ReciprocalSpace::Row;

PairTerm short_range_pair(double q_i, double q_j, const Vec3& dr, double alpha) {
  const double r2 = dot(dr, dr);
  if (r2 == 0.0) throw Error(ErrorKind::coincident_particles, "charged particles at zero separation");
  const ScreenedCoulomb kernel(alpha);
  const auto [screened, radial] = kernel(r2);
  const double qq = q_i * q_j;
  return PairTerm{dr * (qq * radial), qq * screened};
}

double short_range(const LoopEngine& engine, ParticleSet& ps, const CellList& cl, const EwaldParams& params) {
  GlobalAccumulator energy(1);
  AccessList access;
  access.particle(Property::charge, Access::read).particle(Property::force, Access::inc);
  const GlobalSlot u = access.global(energy, Access::inc_zero);
  const ScreenedCoulomb kernel(params.alpha);
  auto body = [=](const PairView& v) {
    const double qi = v.center(Property::charge);
    const double qj = v.neighbor(Property::charge);
    if (qi == 0.0 || qj == 0.0) return;
    const double r2 = v.distance_sq();
    if (r2 == 0.0) throw Error(ErrorKind::coincident_particles, "charged particles at zero separation");
    const auto [screened, radial] = kernel(r2);
    const double qq = qi * qj;
    v.inc_center(Property::force, v.separation() * (qq * radial));
    v.inc_global(u, 0, 0.5 * qq * screened);
  };
  engine.execute_pair_loop(PairKernel<decltype(body)>{std::move(access), body}, ps, cl);
  return energy[0];
}

void compute_rho_hat(const LoopEngine& engine, ParticleSet& ps, ReciprocalSpace& rs) {
  AccessList access;
  access.particle(Property::position, Access::read).particle(Property::charge, Access::read);
  const GlobalSlot rho = access.global(rs.rho_hat(), Access::inc_zero);
  const std::size_t nk = rs.count();
  const int M = rs.max_mode();
  const double unit = rs.unit();
  const auto rows = rs.rows();

  auto body = [=](const ParticleView& v) {
    const double q = v.get(Property::charge);
    if (q == 0.0) return;
    PhaseTable& t = scratch_table();
    t.fill(v.get_vec(Property::position), unit, M);
    const auto out = v.global_inc(rho);
    double* re = out.data();
    double* im = re + nk;
    const double* zr = t.re(2);
    const double* zi = t.im(2);
    for (const ReciprocalRow& row : rows) {
      const double xr = t.re(0)[row.mx], xi = t.im(0)[row.mx];
      const double yr = t.re(1)[row.my], yi = t.im(1)[row.my];
      const double pr = q * (xr * yr - xi * yi);
      const double pi = q * (xr * yi + xi * yr);
      std::size_t k = row.offset;
      for (int mz = row.mz_begin; mz < row.mz_end; ++mz, ++k) {
        re[k] += pr * zr[mz] - pi * zi[mz];
        im[k] -= pr * zi[mz] + pi * zr[mz];
      }
    }
  };
  engine.execute_particle_loop(ParticleKernel<decltype(body)>{std::move(access), body}, ps);
}

LongRangeResult long_range_energy_forces(const LoopEngine& engine, ParticleSet& ps, const ReciprocalSpace& rs) {
  GlobalAccumulator energy(2);  // real part, imaginary residue
  AccessList access;
  access.particle(Property::position, Access::read)
      .particle(Property::charge, Access::read)
      .particle(Property::force, Access::inc);
  const GlobalSlot rho = access.global(rs.rho_hat());
  const GlobalSlot u = access.global(energy, Access::inc_zero);
  const std::size_t nk = rs.count();
  const int M = rs.max_mode();
  const double unit = rs.unit();
  const auto rows = rs.rows();
  const double* kx = rs.kx().data();
  const double* ky = rs.ky().data();
  const double* kz = rs.kz().data();
  const double* coeff = rs.coeff().data();

  auto body = [=](const ParticleView& v) {
    const double q = v.get(Property::charge);
    if (q == 0.0) return;
    PhaseTable& t = scratch_table();
    t.fill(v.get_vec(Property::position), unit, M);
    const auto rho_hat = v.global_read(rho);
    const double* rr = rho_hat.data();
    const double* ri = rr + nk;
    const double* zr = t.re(2);
    const double* zi = t.im(2);
    double e_re = 0.0, e_im = 0.0, fx = 0.0, fy = 0.0, fz = 0.0;
    for (const ReciprocalRow& row : rows) {
      const double xr = t.re(0)[row.mx], xi = t.im(0)[row.mx];
      const double yr = t.re(1)[row.my], yi = t.im(1)[row.my];
      const double pr = xr * yr - xi * yi;
      const double pi = xr * yi + xi * yr;
      std::size_t k = row.offset;
      for (int mz = row.mz_begin; mz < row.mz_end; ++mz, ++k) {
        const double ar = pr * zr[mz] - pi * zi[mz];
        const double ai = pr * zi[mz] + pi * zr[mz];
        const double wr = coeff[k] * (ar * rr[k] - ai * ri[k]);
        const double wi = coeff[k] * (ar * ri[k] + ai * rr[k]);
        e_re += wr;
        e_im += wi;
        fx += kx[k] * wi;
        fy += ky[k] * wi;
        fz += kz[k] * wi;
      }
    }
    // Each stored k carries its -k partner: the 1/2 in u_lr cancels and the force doubles.
    v.inc_global(u, 0, q * e_re);
    v.inc_global(u, 1, q * e_im);
    v.inc(Property::force, Vec3{fx, fy, fz} * (2.0 * q));
  };
  engine.execute_particle_loop(ParticleKernel<decltype(body)>{std::move(access), body}, ps);
  return LongRangeResult{energy[0], energy[1]};
}

double self_energy(const ParticleSet& ps, const EwaldParams& params) {
  double q2 = 0.0;
  for (double q : ps.data(Property::charge)) q2 += q * q;
  return -std::sqrt(params.alpha / std::numbers::pi) * q2;
}

CoulombEnergy total_coulomb(const LoopEngine& engine, ParticleSet& ps, const EwaldParams& params,
                            ReciprocalSpace& rs, const CellList& cl, const CoulombFaults& faults,
                            CoulombTimings* timings) {
  const double net = total_charge(ps);
  if (std::abs(net) > kNeutralityTolerance) {
    throw Error(ErrorKind::neutrality_violation, "net charge " + std::to_string(net) + " is not zero");
  }
  CoulombEnergy e;
  auto t0 = Clock::now();
  e.short_range = short_range(engine, ps, cl, params);
  const double t_sr = seconds_since(t0);

  t0 = Clock::now();
  compute_rho_hat(engine, ps, rs);
  const double t_rho = seconds_since(t0);

  t0 = Clock::now();
  const LongRangeResult lr = long_range_energy_forces(engine, ps, rs);
  const double t_lr = seconds_since(t0);
  e.long_range = lr.energy;
  e.long_range_imag = lr.imag_residue;

  e.self = self_energy(ps, params) * (faults.negate_self_energy ? -1.0 : 1.0);
  if (timings != nullptr) *timings = CoulombTimings{t_sr, t_rho, t_lr};
  return e;
}

EwaldCoulomb::EwaldCoulomb(const SimulationBox& box, const EwaldParams& params)
    : box_(box), params_(params), rs_(enumerate_kvectors(box, params)) {}

CoulombEnergy EwaldCoulomb::compute(const LoopEngine& engine, ParticleSet& ps) {
  const CellList cl = build_cell_list(ps, box_, params_.r_cutoff);
  return compute(engine, ps, cl);
}

CoulombEnergy EwaldCoulomb::compute(const LoopEngine& engine, ParticleSet& ps, const CellList& cl) {
  return total_coulomb(engine, ps, params_, rs_, cl, faults_, &timings_);
}

}  // namespace ewaldmd
