#pragma once

// Ewald electrostatics in Gaussian units (Coulomb constant 1): energies in
// q^2/Angstrom, forces in q^2/Angstrom^2.
//
//   U = u_sr + u_lr + u_self
//   u_sr   = 1/2 sum_{i != j, r_ij < r_c} q_i q_j erfc(sqrt(alpha) r_ij) / r_ij
//   u_lr   = 1/2 sum_{0 < |k| < k_c} C_k |rho_k|^2,   rho_k = sum_j q_j exp(-i k.r_j)
//   C_k    = 4 pi / (V k^2) exp(-k^2 / (4 alpha))
//   u_self = -sqrt(alpha / pi) sum_i q_i^2

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ewaldmd/core_model.hpp"
#include "ewaldmd/loop_engine.hpp"

namespace ewaldmd {

struct EwaldParams {
  double alpha = 0.0;     // splitting parameter, 1/Angstrom^2
  double r_cutoff = 0.0;  // Angstrom
  double k_cutoff = 0.0;  // 1/Angstrom
  double tolerance = 0.0;
};

struct ParameterOverrides {
  std::optional<double> alpha;
  std::optional<double> r_cutoff;
};

// Real-space tail erfc(sqrt(alpha) r_c) / r_c <= eps and reciprocal tail
// exp(-k_c^2 / (4 alpha)) <= eps.
bool satisfies_truncation(const EwaldParams& p);

// With s = sqrt(-ln eps):
//   auto:            alpha = pi (n / V^2)^(1/3), r_c = s / sqrt(alpha)
//   r_c override:    alpha = (s / r_c)^2
//   alpha override:  r_c = s / sqrt(alpha)
// and k_c = 2 s sqrt(alpha). A derived r_c beyond L/2 is clamped to L/2 with
// alpha re-derived from it; an explicit alpha that needs r_c > L/2 is rejected.
EwaldParams choose_parameters(long long n, const SimulationBox& box, double epsilon,
                              const ParameterOverrides& overrides = {});

// Half-space reciprocal vectors m = (mx, my, mz), lexicographically positive,
// 0 < |k| < k_c. Each stored k also stands for -k. Vectors sharing (mx, my) form
// a row with a contiguous mz interval, which is the traversal order of the
// structure-factor kernels.
class ReciprocalSpace {
 public:
  struct Row {
    int mx;
    int my;
    int mz_begin;
    int mz_end;  // exclusive
    std::size_t offset;
  };

  std::size_t count() const noexcept { return coeff_.size(); }
  std::size_t represented_count() const noexcept { return 2 * coeff_.size(); }
  int max_mode() const noexcept { return max_mode_; }
  double unit() const noexcept { return unit_; }  // 2 pi / L
  std::span<const Row> rows() const noexcept { return rows_; }

  Vec3 k(std::size_t idx) const { return {kx_[idx], ky_[idx], kz_[idx]}; }
  std::span<const double> kx() const noexcept { return kx_; }
  std::span<const double> ky() const noexcept { return ky_; }
  std::span<const double> kz() const noexcept { return kz_; }
  std::span<const double> coeff() const noexcept { return coeff_; }

  // Re plane in [0, count), Im plane in [count, 2 count).
  GlobalAccumulator& rho_hat() noexcept { return rho_hat_; }
  const GlobalAccumulator& rho_hat() const noexcept { return rho_hat_; }
  double rho_re(std::size_t idx) const { return rho_hat_[idx]; }
  double rho_im(std::size_t idx) const { return rho_hat_[count() + idx]; }

 private:
  friend ReciprocalSpace enumerate_kvectors(const SimulationBox& box, const EwaldParams& params);

  int max_mode_ = 0;
  double unit_ = 0.0;
  std::vector<Row> rows_;
  std::vector<double> kx_, ky_, kz_, coeff_;
  GlobalAccumulator rho_hat_{0};
};

ReciprocalSpace enumerate_kvectors(const SimulationBox& box, const EwaldParams& params);

struct PairTerm {
  Vec3 force;     // on the center particle
  double energy;  // full pair energy; each ordered visit books half of it
};

// Screened Coulomb interaction of center i with neighbor j; dr = r_i - r_j.
PairTerm short_range_pair(double q_i, double q_j, const Vec3& dr, double alpha);

// Accumulates real-space forces into F and returns u_sr.
double short_range(const LoopEngine& engine, ParticleSet& ps, const CellList& cl, const EwaldParams& params);

// rho_k = sum_j q_j (cos(k.r_j) - i sin(k.r_j)) for every stored k.
void compute_rho_hat(const LoopEngine& engine, ParticleSet& ps, ReciprocalSpace& rs);

struct LongRangeResult {
  double energy = 0.0;
  double imag_residue = 0.0;  // analytically zero
};

// Accumulates reciprocal-space forces into F; needs rho_hat for the current positions.
LongRangeResult long_range_energy_forces(const LoopEngine& engine, ParticleSet& ps, const ReciprocalSpace& rs);

double self_energy(const ParticleSet& ps, const EwaldParams& params);

inline constexpr double kNeutralityTolerance = 1e-12;

struct CoulombEnergy {
  double short_range = 0.0;
  double long_range = 0.0;
  double self = 0.0;
  double long_range_imag = 0.0;
  double total() const { return short_range + long_range + self; }
};

struct CoulombTimings {
  double short_range = 0.0;
  double rho_hat = 0.0;
  double long_range = 0.0;
};

// Test-only fault injection.
struct CoulombFaults {
  bool negate_self_energy = false;
};

// Forces accumulate into ps; callers zero them when a fresh evaluation is wanted.
CoulombEnergy total_coulomb(const LoopEngine& engine, ParticleSet& ps, const EwaldParams& params,
                            ReciprocalSpace& rs, const CellList& cl, const CoulombFaults& faults = {},
                            CoulombTimings* timings = nullptr);

// Owns the reciprocal space for one box and parameter set.
class EwaldCoulomb {
 public:
  EwaldCoulomb(const SimulationBox& box, const EwaldParams& params);

  // Builds a fresh cell list for the current positions.
  CoulombEnergy compute(const LoopEngine& engine, ParticleSet& ps);
  CoulombEnergy compute(const LoopEngine& engine, ParticleSet& ps, const CellList& cl);

  const EwaldParams& params() const noexcept { return params_; }
  const ReciprocalSpace& reciprocal() const noexcept { return rs_; }
  const CoulombTimings& last_timings() const noexcept { return timings_; }
  void set_faults(const CoulombFaults& faults) { faults_ = faults; }

 private:
  SimulationBox box_;
  EwaldParams params_;
  ReciprocalSpace rs_;
  CoulombTimings timings_;
  CoulombFaults faults_;
};

}  // namespace ewaldmd
