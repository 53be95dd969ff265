#include "ewaldmd/xyz_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ewaldmd/error.hpp"
#include "ewaldmd/sim_driver.hpp"

namespace ewaldmd {

namespace {

std::string real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* symbol_for(double q) {
  if (q > 0.0) return "Na";
  if (q < 0.0) return "Cl";
  return "X";
}

double mass_for(const std::string& symbol) {
  if (symbol == "Na") return kSodiumMass;
  if (symbol == "Cl") return kChlorideMass;
  return 1.0;
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw Error(ErrorKind::parse_error, "xyz line " + std::to_string(line) + ": " + what);
}

std::vector<std::string> split(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

double to_real(const std::string& tok, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) fail(line, "non-numeric field '" + tok + "'");
  return v;
}

double parse_lattice(const std::string& comment, std::size_t line) {
  const auto key = comment.find("Lattice=\"");
  if (key == std::string::npos) fail(line, "missing Lattice=\"L 0 0 0 L 0 0 0 L\"");
  const auto begin = key + 9;
  const auto end = comment.find('"', begin);
  if (end == std::string::npos) fail(line, "unterminated Lattice string");
  const auto fields = split(comment.substr(begin, end - begin));
  if (fields.size() != 9) fail(line, "Lattice needs 9 numbers");
  double m[9];
  for (int k = 0; k < 9; ++k) m[k] = to_real(fields[k], line);
  const double L = m[0];
  for (int k = 0; k < 9; ++k) {
    const double expected = (k % 4 == 0) ? L : 0.0;
    if (m[k] != expected) fail(line, "only cubic lattices are supported");
  }
  if (!(L > 0.0)) fail(line, "lattice edge must be positive");
  return L;
}

}  // namespace

void write_xyz(const ParticleSet& ps, std::ostream& out) {
  const std::string L = real(ps.box().edge_length());
  out << ps.size() << '\n';
  out << "Lattice=\"" << L << " 0 0 0 " << L << " 0 0 0 " << L
      << "\" Properties=species:S:1:pos:R:3:charge:R:1\n";
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const Vec3 r = ps.position(i);
    out << symbol_for(ps.charge(i)) << ' ' << real(r.x) << ' ' << real(r.y) << ' ' << real(r.z) << ' '
        << real(ps.charge(i)) << '\n';
  }
}

void write_xyz(const ParticleSet& ps, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io_error, "cannot write " + path.string());
  write_xyz(ps, out);
  if (!out) throw Error(ErrorKind::io_error, "write failed for " + path.string());
}

ParticleSet read_xyz(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(1, "empty file");
  const auto header = split(line);
  if (header.size() != 1) fail(1, "first line must hold the particle count");
  long long n = 0;
  {
    const auto& tok = header[0];
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), n);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || n < 1) fail(1, "invalid particle count '" + tok + "'");
  }
  if (!std::getline(in, line)) fail(2, "missing comment line");
  const double L = parse_lattice(line, 2);

  ParticleSet ps = create_particle_set(n, SimulationBox(L));
  std::size_t read = 0;
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split(line);
    if (fields.empty()) continue;
    if (read == ps.size()) fail(line_no, "more records than the header count " + std::to_string(n));
    if (fields.size() == 4) fail(line_no, "missing charge column; records are 'symbol x y z q'");
    if (fields.size() != 5) fail(line_no, "expected 'symbol x y z q'");
    ps.set_position(read, Vec3{to_real(fields[1], line_no), to_real(fields[2], line_no), to_real(fields[3], line_no)});
    ps.set_charge(read, to_real(fields[4], line_no));
    ps.set_mass(read, mass_for(fields[0]));
    ++read;
  }
  if (read != ps.size()) {
    fail(line_no, "header declares " + std::to_string(n) + " particles but " + std::to_string(read) + " records follow");
  }
  return ps;
}

ParticleSet read_xyz(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io_error, "cannot open " + path.string());
  return read_xyz(in);
}

}  // namespace ewaldmd
