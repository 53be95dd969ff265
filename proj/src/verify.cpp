#include "ewaldmd/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "ewaldmd/error.hpp"
#include "ewaldmd/oracle.hpp"

namespace ewaldmd {

namespace {

double relative(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

CheckResult check(std::string name, double value, double threshold, std::string detail = {}) {
  return CheckResult{std::move(name), value <= threshold, value, threshold, std::move(detail)};
}

}  // namespace

double force_mismatch(std::span<const Vec3> analytic, std::span<const Vec3> reference, double absolute_floor) {
  if (analytic.size() != reference.size()) throw Error(ErrorKind::invalid_argument, "force arrays differ in length");
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    for (int a = 0; a < 3; ++a) {
      const double diff = std::abs(analytic[i][a] - reference[i][a]);
      if (diff <= absolute_floor) continue;
      worst = std::max(worst, diff / std::max(std::abs(reference[i][a]), 1e-300));
    }
  }
  return worst;
}

CoulombEvaluation evaluate_coulomb(const LoopEngine& engine, const ParticleSet& ps, const EwaldParams& params,
                                   const CoulombFaults& faults) {
  ParticleSet work = ps;
  work.zero(Property::force);
  EwaldCoulomb coulomb(work.box(), params);
  coulomb.set_faults(faults);
  CoulombEvaluation out;
  out.energy = coulomb.compute(engine, work);
  out.forces.resize(work.size());
  for (std::size_t i = 0; i < work.size(); ++i) out.forces[i] = work.force(i);
  return out;
}

double coulomb_energy_with_alpha(const LoopEngine& engine, const ParticleSet& ps, double tolerance, double alpha) {
  const auto n = static_cast<long long>(ps.size());
  try {
    const EwaldParams p = choose_parameters(n, ps.box(), tolerance, ParameterOverrides{alpha, std::nullopt});
    return evaluate_coulomb(engine, ps, p).energy.total();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::box_too_small) throw;
  }
  const double needed = std::sqrt(-std::log(tolerance) / alpha);
  const int factor = static_cast<int>(std::ceil(2.0 * needed / ps.box().edge_length()));
  for (int f = std::max(factor, 2); f <= factor + 2; ++f) {
    const ParticleSet super = replicate(ps, f);
    try {
      const EwaldParams p =
          choose_parameters(static_cast<long long>(super.size()), super.box(), tolerance, ParameterOverrides{alpha, {}});
      return evaluate_coulomb(engine, super, p).energy.total() / (static_cast<double>(f) * f * f);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::box_too_small) throw;
    }
  }
  throw Error(ErrorKind::box_too_small, "no supercell admits alpha = " + std::to_string(alpha));
}

bool VerifyReport::all_passed() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::string VerifyReport::human() const {
  std::ostringstream out;
  for (const auto& c : checks) {
    char line[256];
    std::snprintf(line, sizeof line, "%s %-18s value=%.3e threshold=%.3e", c.passed ? "PASS" : "FAIL", c.name.c_str(),
                  c.value, c.threshold);
    out << line;
    if (!c.detail.empty()) out << "  " << c.detail;
    out << '\n';
  }
  out << (all_passed() ? "all checks passed" : "verification FAILED") << '\n';
  return out.str();
}

std::string VerifyReport::json_lines() const {
  std::ostringstream out;
  for (const auto& c : checks) {
    nlohmann::json j = {{"check", c.name}, {"passed", c.passed}, {"value", c.value}, {"threshold", c.threshold}};
    if (!c.detail.empty()) j["detail"] = c.detail;
    out << j.dump() << '\n';
  }
  return out.str();
}

VerifyReport verify(const SimConfig& config, const ParticleSet& input, const VerifyOptions& options) {
  VerifyReport report;
  const LoopEngine engine(resolve_thread_count(config.threads));
  ParticleSet ps = input;
  ps.wrap_positions();

  const double net = total_charge(ps);
  report.checks.push_back(
      check("neutrality", std::abs(net), kNeutralityTolerance, std::abs(net) > kNeutralityTolerance ? "net charge " + std::to_string(net) : ""));
  if (!report.checks.back().passed) return report;

  const auto n = static_cast<long long>(ps.size());
  const EwaldParams params = choose_parameters(n, ps.box(), config.tolerance, config.ewald);
  CoulombFaults faults;
  faults.negate_self_energy = options.negate_self_energy;
  const CoulombEvaluation base = evaluate_coulomb(engine, ps, params, faults);
  const double u = base.energy.total();

  if (ps.size() <= oracle::kReferenceParticleLimit) {
    const oracle::Reference ref = oracle::direct_ewald_reference(ps, params);
    report.checks.push_back(check("oracle_reference", relative(u, ref.energy), 1e-5));
  }
  if (options.lattice_reference != nullptr && options.lattice_reference->size() <= kLatticeCheckLimit) {
    // Evjen sums converge quickly only for the ordered crystal.
    const ParticleSet& crystal = *options.lattice_reference;
    const EwaldParams cp = choose_parameters(static_cast<long long>(crystal.size()), crystal.box(), config.tolerance,
                                             config.ewald);
    const double ewald = evaluate_coulomb(engine, crystal, cp, faults).energy.total();
    const double lattice = oracle::direct_lattice_sum(crystal, options.lattice_shells);
    report.checks.push_back(check("lattice_sum", relative(ewald, lattice), 1e-5, "unperturbed crystal"));
  }

  {
    // The truncated energy jumps by up to ~eps whenever a pair crosses r_c,
    // which central differences amplify by 1/(2h); differentiate a tightly
    // truncated energy so the comparison sees the forces alone.
    EwaldParams tight = params;
    if (config.tolerance > kFiniteDifferenceTolerance) {
      tight = choose_parameters(n, ps.box(), kFiniteDifferenceTolerance);
    }
    const CoulombEvaluation analytic = evaluate_coulomb(engine, ps, tight, faults);
    auto energy = [&](ParticleSet& p) { return evaluate_coulomb(engine, p, tight, faults).energy.total(); };
    const auto fd = oracle::finite_difference_forces(energy, ps, 1e-4);
    report.checks.push_back(check("finite_difference", force_mismatch(analytic.forces, fd), 1e-4));
  }

  {
    const double doubled = coulomb_energy_with_alpha(engine, ps, config.tolerance, 2.0 * params.alpha);
    const double halved = coulomb_energy_with_alpha(engine, ps, config.tolerance, 0.5 * params.alpha);
    report.checks.push_back(
        check("alpha_invariance", std::max(relative(doubled, u), relative(halved, u)), 5e-6));
  }

  {
    ParticleSet shifted = ps;
    const Vec3 shift{1.2345, -2.3456, 0.789};
    for (std::size_t i = 0; i < shifted.size(); ++i) {
      shifted.set_position(i, wrap_position(shifted.position(i) + shift, shifted.box()));
    }
    const double moved = evaluate_coulomb(engine, shifted, params, faults).energy.total();
    report.checks.push_back(check("translation", relative(moved, u), 1e-10));
  }

  {
    Vec3 sum;
    double largest = 0.0;
    for (const Vec3& f : base.forces) {
      sum += f;
      largest = std::max(largest, norm(f));
    }
    const double scale = largest * static_cast<double>(ps.size());
    report.checks.push_back(check("momentum", scale > 0.0 ? norm(sum) / scale : norm(sum), 1e-8));
  }

  report.checks.push_back(check("realness",
                                std::abs(base.energy.long_range_imag) / std::max(std::abs(base.energy.long_range), 1e-300),
                                1e-12));
  return report;
}

VerifyReport verify(const SimConfig& config, const VerifyOptions& options) {
  const ParticleSet crystal = build_system(config);
  ParticleSet ps = crystal;
  if (options.jitter > 0.0) jitter_positions(ps, options.jitter, config.seed);
  VerifyOptions with_crystal = options;
  with_crystal.lattice_reference = &crystal;
  return verify(config, ps, with_crystal);
}

}  // namespace ewaldmd
