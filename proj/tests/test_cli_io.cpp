#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ewaldmd/bench.hpp"
#include "ewaldmd/config.hpp"
#include "ewaldmd/error.hpp"
#include "ewaldmd/verify.hpp"
#include "ewaldmd/xyz_io.hpp"

using namespace ewaldmd;

namespace {

std::string error_text(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "ewaldmd_tests";
  std::filesystem::create_directories(dir);
  const auto p = dir / name;
  std::filesystem::remove(p);
  return p;
}

}  // namespace

TEST_CASE("config defaults and overrides") {
  const ParsedConfig cfg = parse_config_text("[system]\nn = 1728\nbox = 30\n");
  const SimConfig defaults;
  CHECK(cfg.sim.n_particles == 1728);
  CHECK(cfg.sim.box == 30.0);
  CHECK(cfg.sim.tolerance == defaults.tolerance);
  CHECK(cfg.sim.dt == defaults.dt);
  CHECK(cfg.has("system.n"));
  CHECK_FALSE(cfg.has("run.threads"));

  const ParsedConfig full = parse_config_text(
      "# comment\n[system]\nn = 64\ndensity = 0.064\n[ewald]\ntolerance = 1e-8\nr_cutoff = 4.5\n"
      "[lj]\nenabled = false\n[run]\nsteps = 7\nthreads = 2\nseed = 9\n");
  CHECK(full.sim.tolerance == 1e-8);
  CHECK(full.sim.ewald.r_cutoff == 4.5);
  CHECK_FALSE(full.sim.lj);
  CHECK(full.sim.n_steps == 7);
  CHECK(full.sim.threads == 2);
  CHECK(full.sim.seed == 9u);
  CHECK(full.sim.box == doctest::Approx(10.0));
}

TEST_CASE("config errors name the line and key") {
  const std::string unknown = error_text([] { parse_config_text("[system]\nn = 8\nfoo = 1\n"); });
  CHECK(unknown.find("foo") != std::string::npos);
  CHECK(unknown.find("3") != std::string::npos);
  CHECK(error_text([] { parse_config_text("[system]\nn = eight\n"); }).find("2") != std::string::npos);
  CHECK_FALSE(error_text([] { parse_config_text("[system\n"); }).empty());
  CHECK_FALSE(error_text([] { parse_config_text("[system]\njust words\n"); }).empty());
  CHECK_FALSE(error_text([] { parse_config_text("[system]\nn = 8\nn = 8\n"); }).empty());
  CHECK_FALSE(error_text([] { parse_config_text("[run]\ndt = -1\n"); }).empty());
  CHECK_FALSE(error_text([] { parse_config(scratch("missing.ini")); }).empty());
}

TEST_CASE("xyz round trip is exact") {
  ParticleSet ps = init_rocksalt(1, 2.82);
  jitter_positions(ps, 0.1234567, 3);
  std::stringstream first;
  write_xyz(ps, first);
  const ParticleSet back = read_xyz(first);
  std::stringstream second;
  write_xyz(back, second);
  CHECK(first.str() == second.str());
  CHECK(back.size() == 8);
  CHECK(back.box().edge_length() == ps.box().edge_length());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    CHECK(back.position(i) == ps.position(i));
    CHECK(back.charge(i) == ps.charge(i));
    CHECK(back.mass(i) == ps.mass(i));
  }

  const auto path = scratch("cell.xyz");
  write_xyz(ps, path);
  CHECK(read_xyz(path).size() == 8);
}

TEST_CASE("xyz errors") {
  const std::string lattice = "Lattice=\"10 0 0 0 10 0 0 0 10\" Properties=species:S:1:pos:R:3:charge:R:1\n";
  std::istringstream short_file("3\n" + lattice + "Na 0 0 0 1\nCl 1 1 1 -1\n");
  CHECK(error_text([&] { read_xyz(short_file); }).find("3") != std::string::npos);

  std::istringstream no_charge("1\n" + lattice + "Na 0 0 0\n");
  CHECK(error_text([&] { read_xyz(no_charge); }).find("charge") != std::string::npos);

  std::istringstream bad_number("1\n" + lattice + "Na 0 x 0 1\n");
  CHECK_FALSE(error_text([&] { read_xyz(bad_number); }).empty());

  std::istringstream bad_count("two\n" + lattice);
  CHECK_FALSE(error_text([&] { read_xyz(bad_count); }).empty());
}

TEST_CASE("log-log slope fit") {
  const std::vector<long long> sizes{1728, 4096, 8000, 17576};
  const ComplexityReport r =
      bench_complexity(SimConfig{}, sizes, {}, [](long long n) { return 3e-7 * std::pow(static_cast<double>(n), 1.5); });
  REQUIRE(r.rows.size() == 4);
  REQUIRE(r.slope.has_value());
  CHECK(*r.slope == doctest::Approx(1.5).epsilon(0.01 / 1.5));
  CHECK(r.rows[0].n_k > 0);
  CHECK(r.rows[3].alpha < r.rows[0].alpha);

  const std::vector<long long> one{1728};
  const ComplexityReport single = bench_complexity(SimConfig{}, one, {}, [](long long) { return 1.0; });
  CHECK(single.rows.size() == 1);
  CHECK_FALSE(single.slope.has_value());

  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  const double xs[] = {1.0, 1.0};
  const double ys[] = {1.0, 2.0};
  CHECK_THROWS_AS(fit_loglog_slope(xs, ys), Error);
}

TEST_CASE("complexity rows are timed") {
  SimConfig c;
  c.n_particles = 216;
  c.box = 15.0;
  const std::vector<long long> sizes{216, 512};
  const ComplexityReport r = bench_complexity(c, sizes, TimingOptions{1, 5});
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].t_total > 0.0);
  CHECK(r.rows[1].t_sr > 0.0);
  CHECK(r.slope.has_value());
  const auto rows = complexity_csv_rows(r);
  CHECK(rows.size() == 2);
  CHECK(rows[0].rfind("216,", 0) == 0);
}

TEST_CASE("thread sweep") {
  SimConfig c;
  c.n_particles = 216;
  c.box = 15.0;
  c.threads = 4;
  const std::vector<std::size_t> one{1};
  const ThreadReport r = bench_threads(c, one, TimingOptions{1, 5});
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].speedup == 1.0);
  CHECK(r.rows[0].efficiency == 1.0);
  CHECK(r.warnings.empty());

  const ThreadReport warned = bench_threads(c, one, TimingOptions{1, 5}, true);
  CHECK(warned.warnings.size() == 1);
  const std::vector<std::size_t> zero{0};
  CHECK_THROWS_AS(bench_threads(c, zero), Error);
}

TEST_CASE("csv append keeps a single header") {
  const auto path = scratch("bench.csv");
  append_csv(path, kThreadsHeader, {"1,0.5,1,1"});
  append_csv(path, kThreadsHeader, {"2,0.3,1.6,0.8"});
  std::ifstream in(path);
  std::string line;
  int lines = 0, headers = 0;
  while (std::getline(in, line)) {
    ++lines;
    headers += line == kThreadsHeader;
  }
  CHECK(lines == 3);
  CHECK(headers == 1);
  CHECK_THROWS_AS(append_csv(path, kComplexityHeader, {"1"}), Error);
}

TEST_CASE("verify") {
  SimConfig c;
  c.n_particles = 64;
  c.box = 10.0;
  const VerifyReport ok = verify(c);
  CHECK(ok.all_passed());
  CHECK(ok.checks.size() >= 6);
  CHECK(ok.json_lines().find("\"oracle_reference\"") != std::string::npos);

  VerifyOptions corrupt;
  corrupt.negate_self_energy = true;
  const VerifyReport bad = verify(c, corrupt);
  CHECK_FALSE(bad.all_passed());
  bool oracle_failed = false;
  for (const CheckResult& r : bad.checks) oracle_failed |= r.name == "oracle_reference" && !r.passed;
  CHECK(oracle_failed);

  ParticleSet charged = init_rocksalt(1, 2.82);
  charged.set_charge(0, 2.0);
  const VerifyReport neutral = verify(c, charged);
  CHECK_FALSE(neutral.all_passed());
  CHECK(neutral.checks.front().name == "neutrality");
  CHECK(neutral.human().find("net charge") != std::string::npos);
}
