// Command-line front end: run, bench-complexity, bench-threads, verify.
//
// Exit codes: 0 success, 1 check failure, 2 usage or configuration error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ewaldmd/bench.hpp"
#include "ewaldmd/config.hpp"
#include "ewaldmd/error.hpp"
#include "ewaldmd/sim_driver.hpp"
#include "ewaldmd/verify.hpp"
#include "ewaldmd/xyz_io.hpp"

namespace {

using namespace ewaldmd;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

ParsedConfig load(const std::string& path, const SimConfig& defaults) {
  if (path.empty()) return ParsedConfig{defaults, {}};
  ParsedConfig cfg = parse_config(path);
  // System size falls back to the subcommand's default when the file leaves it out.
  if (!cfg.has("system.n")) cfg.sim.n_particles = defaults.n_particles;
  if (!cfg.has("system.box") && !cfg.has("system.density")) cfg.sim.box = defaults.box;
  return cfg;
}

void emit(const std::string& csv_path, const char* header, const std::vector<std::string>& rows) {
  if (csv_path.empty()) {
    std::cout << header << '\n';
    for (const auto& r : rows) std::cout << r << '\n';
  } else {
    append_csv(csv_path, header, rows);
  }
}

int cmd_run(const std::string& config_path, const std::string& xyz_in, const std::string& xyz_out,
            std::optional<long long> steps) {
  ParsedConfig cfg = load(config_path, SimConfig{});
  if (steps) cfg.sim.n_steps = *steps;
  ParticleSet ps = xyz_in.empty() ? build_system(cfg.sim) : read_xyz(xyz_in);
  if (xyz_in.empty()) assign_velocities(ps, cfg.sim.velocity_scale, cfg.sim.seed);
  const RunMetrics m = run(cfg.sim, ps);

  std::printf("# N=%zu L=%.6g workers=%zu", ps.size(), ps.box().edge_length(), m.workers);
  if (m.params) {
    std::printf(" alpha=%.6g r_c=%.6g k_c=%.6g N_k=%zu", m.params->alpha, m.params->r_cutoff, m.params->k_cutoff,
                m.k_vectors);
  }
  std::printf(" setup=%.6gs\n", m.setup_seconds);
  std::printf("step,wall,t_sr,t_alg1,t_alg2,t_lj,t_integrate,e_coulomb,e_lj,e_kinetic,e_total\n");
  std::printf("0,0,0,0,0,0,0,%.12g,%.12g,%.12g,%.12g\n", m.initial.e_coulomb, m.initial.e_lj, m.initial.e_kinetic,
              m.initial.e_total());
  for (std::size_t s = 0; s < m.steps.size(); ++s) {
    const StepRecord& r = m.steps[s];
    std::printf("%zu,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.12g,%.12g,%.12g,%.12g\n", s + 1, r.wall, r.t_short_range,
                r.t_rho_hat, r.t_long_range, r.t_lj, r.t_integrate, r.e_coulomb, r.e_lj, r.e_kinetic, r.e_total());
  }
  std::printf("# max relative energy drift %.3e\n", m.max_relative_drift);
  if (!xyz_out.empty()) write_xyz(ps, xyz_out);
  return kExitOk;
}

int cmd_bench_complexity(const std::string& config_path, const std::vector<long long>& n_list,
                         const std::string& csv_path, int samples) {
  const ParsedConfig cfg = load(config_path, SimConfig{});
  const ComplexityReport report = bench_complexity(cfg.sim, n_list, TimingOptions{2, samples});
  emit(csv_path, kComplexityHeader, complexity_csv_rows(report));
  if (report.slope) std::cerr << "log-log slope: " << *report.slope << '\n';
  return kExitOk;
}

int cmd_bench_threads(const std::string& config_path, const std::vector<std::size_t>& threads,
                      const std::string& csv_path, int samples) {
  SimConfig defaults;
  defaults.n_particles = 32768;
  defaults.box = 80.0;
  const ParsedConfig cfg = load(config_path, defaults);
  const ThreadReport report = bench_threads(cfg.sim, threads, TimingOptions{2, samples}, cfg.has("run.threads"));
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  emit(csv_path, kThreadsHeader, threads_csv_rows(report));
  return kExitOk;
}

int cmd_verify(const std::string& config_path, const std::string& xyz_in, const std::string& json_path,
               bool corrupt_self_energy) {
  SimConfig defaults;
  defaults.n_particles = 64;
  defaults.box = 10.0;
  const ParsedConfig cfg = load(config_path, defaults);
  VerifyOptions options;
  options.negate_self_energy = corrupt_self_energy;
  const VerifyReport report = xyz_in.empty() ? verify(cfg.sim, options) : verify(cfg.sim, read_xyz(xyz_in), options);
  std::cout << report.human();
  if (json_path.empty()) {
    std::cout << report.json_lines();
  } else {
    std::ofstream out(json_path);
    if (!out) throw Error(ErrorKind::io_error, "cannot write " + json_path);
    out << report.json_lines();
  }
  return report.all_passed() ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ewald electrostatics molecular dynamics"};
  app.require_subcommand(1);

  std::string config_path;
  std::string xyz_in, xyz_out, csv_path, json_path;
  std::optional<long long> steps;
  std::vector<long long> n_list{1728, 4096, 8000, 17576};
  std::vector<std::size_t> thread_list{1, 2, 4, 8};
  int samples = 5;
  bool corrupt = false;

  auto* run_cmd = app.add_subcommand("run", "Run NVE dynamics and print the energy trace");
  run_cmd->add_option("-c,--config", config_path, "Configuration file")->check(CLI::ExistingFile);
  run_cmd->add_option("--xyz", xyz_in, "Initial configuration (extended XYZ)")->check(CLI::ExistingFile);
  run_cmd->add_option("--write-xyz", xyz_out, "Write the final configuration");
  run_cmd->add_option("--steps", steps, "Override run.steps");

  auto* cx_cmd = app.add_subcommand("bench-complexity", "Time per iteration against particle count");
  cx_cmd->add_option("-c,--config", config_path, "Configuration file")->check(CLI::ExistingFile);
  cx_cmd->add_option("-n,--sizes", n_list, "Particle counts (even cubes)")->delimiter(',');
  cx_cmd->add_option("--csv", csv_path, "Append rows to this CSV file");
  cx_cmd->add_option("--samples", samples, "Timed iterations per size (median)")->check(CLI::Range(5, 1000));

  auto* th_cmd = app.add_subcommand("bench-threads", "Strong scaling over worker counts");
  th_cmd->add_option("-c,--config", config_path, "Configuration file")->check(CLI::ExistingFile);
  th_cmd->add_option("-t,--threads", thread_list, "Worker counts")->delimiter(',');
  th_cmd->add_option("--csv", csv_path, "Append rows to this CSV file");
  th_cmd->add_option("--samples", samples, "Timed iterations per count (median)")->check(CLI::Range(5, 1000));

  auto* vf_cmd = app.add_subcommand("verify", "Run the oracle and invariance checks");
  vf_cmd->add_option("-c,--config", config_path, "Configuration file")->check(CLI::ExistingFile);
  vf_cmd->add_option("--xyz", xyz_in, "Check this configuration instead of a generated lattice")
      ->check(CLI::ExistingFile);
  vf_cmd->add_option("--json", json_path, "Write JSON-lines results here instead of stdout");
  vf_cmd->add_flag("--corrupt-self-energy", corrupt, "Fault injection: flip the self-energy sign");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run_cmd) return cmd_run(config_path, xyz_in, xyz_out, steps);
    if (*cx_cmd) return cmd_bench_complexity(config_path, n_list, csv_path, samples);
    if (*th_cmd) return cmd_bench_threads(config_path, thread_list, csv_path, samples);
    if (*vf_cmd) return cmd_verify(config_path, xyz_in, json_path, corrupt);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
