#include "ewaldmd/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "ewaldmd/error.hpp"

namespace ewaldmd {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct LineContext {
  std::string_view origin;
  std::size_t line;
  std::string_view key;
  std::string_view value;

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::parse_error,
                std::string(origin) + ":" + std::to_string(line) + ": key '" + std::string(key) + "' " + what);
  }
};

double parse_real(const LineContext& ctx) {
  double v = 0.0;
  const auto* first = ctx.value.data();
  const auto* last = first + ctx.value.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    ctx.fail("expects a real number, got '" + std::string(ctx.value) + "'");
  }
  return v;
}

long long parse_integer(const LineContext& ctx) {
  long long v = 0;
  const auto* first = ctx.value.data();
  const auto* last = first + ctx.value.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) ctx.fail("expects an integer, got '" + std::string(ctx.value) + "'");
  return v;
}

bool parse_bool(const LineContext& ctx) {
  if (ctx.value == "true" || ctx.value == "on" || ctx.value == "yes" || ctx.value == "1") return true;
  if (ctx.value == "false" || ctx.value == "off" || ctx.value == "no" || ctx.value == "0") return false;
  ctx.fail("expects a boolean, got '" + std::string(ctx.value) + "'");
}

double positive(const LineContext& ctx, double v) {
  if (!(v > 0.0)) ctx.fail("must be positive");
  return v;
}

using Setter = std::function<void(ParsedConfig&, const LineContext&)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"system.n", [](ParsedConfig& c, const LineContext& x) { c.sim.n_particles = parse_integer(x); }},
      {"system.box", [](ParsedConfig& c, const LineContext& x) { c.sim.box = positive(x, parse_real(x)); }},
      {"system.density", [](ParsedConfig&, const LineContext& x) { positive(x, parse_real(x)); }},
      {"ewald.tolerance",
       [](ParsedConfig& c, const LineContext& x) {
         const double v = parse_real(x);
         if (!(v > 0.0 && v < 1.0)) x.fail("must lie in (0, 1)");
         c.sim.tolerance = v;
       }},
      {"ewald.alpha", [](ParsedConfig& c, const LineContext& x) { c.sim.ewald.alpha = positive(x, parse_real(x)); }},
      {"ewald.r_cutoff",
       [](ParsedConfig& c, const LineContext& x) { c.sim.ewald.r_cutoff = positive(x, parse_real(x)); }},
      {"ewald.enabled", [](ParsedConfig& c, const LineContext& x) { c.sim.coulomb = parse_bool(x); }},
      {"lj.sigma", [](ParsedConfig& c, const LineContext& x) { c.sim.lj_params.sigma = positive(x, parse_real(x)); }},
      {"lj.epsilon",
       [](ParsedConfig& c, const LineContext& x) { c.sim.lj_params.epsilon = positive(x, parse_real(x)); }},
      {"lj.cutoff", [](ParsedConfig& c, const LineContext& x) { c.sim.lj_params.cutoff = positive(x, parse_real(x)); }},
      {"lj.enabled", [](ParsedConfig& c, const LineContext& x) { c.sim.lj = parse_bool(x); }},
      {"run.dt", [](ParsedConfig& c, const LineContext& x) { c.sim.dt = positive(x, parse_real(x)); }},
      {"run.steps",
       [](ParsedConfig& c, const LineContext& x) {
         const long long v = parse_integer(x);
         if (v < 0) x.fail("must be non-negative");
         c.sim.n_steps = v;
       }},
      {"run.threads",
       [](ParsedConfig& c, const LineContext& x) {
         const long long v = parse_integer(x);
         if (v < 0) x.fail("must be non-negative");
         c.sim.threads = static_cast<std::size_t>(v);
       }},
      {"run.seed",
       [](ParsedConfig& c, const LineContext& x) {
         const long long v = parse_integer(x);
         if (v < 0) x.fail("must be non-negative");
         c.sim.seed = static_cast<std::uint64_t>(v);
       }},
      {"run.velocity_scale",
       [](ParsedConfig& c, const LineContext& x) {
         const double v = parse_real(x);
         if (v < 0.0) x.fail("must be non-negative");
         c.sim.velocity_scale = v;
       }},
  };
  return table;
}

}  // namespace

ParsedConfig parse_config_text(std::string_view text, std::string_view origin) {
  ParsedConfig cfg;
  std::string section;
  double density = 0.0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = line.find_first_of("#;"); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const std::string where = std::string(origin) + ":" + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorKind::parse_error, where + "malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "system" && section != "ewald" && section != "lj" && section != "run") {
        throw Error(ErrorKind::parse_error, where + "unknown section '" + section + "'");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorKind::parse_error, where + "expected key = value");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) throw Error(ErrorKind::parse_error, where + "missing key");
    if (section.empty()) throw Error(ErrorKind::parse_error, where + "key '" + std::string(key) + "' outside a section");

    const std::string qualified = section + "." + std::string(key);
    const auto it = setters().find(qualified);
    if (it == setters().end()) throw Error(ErrorKind::parse_error, where + "unknown key '" + std::string(key) + "'");
    if (cfg.keys.count(qualified) != 0) {
      throw Error(ErrorKind::parse_error, where + "duplicate key '" + std::string(key) + "'");
    }
    const LineContext ctx{origin, line_no, key, value};
    it->second(cfg, ctx);
    if (qualified == "system.density") density = parse_real(ctx);
    cfg.keys.insert(qualified);
  }

  if (cfg.has("system.density")) {
    if (cfg.has("system.box")) {
      throw Error(ErrorKind::parse_error, std::string(origin) + ": give either system.box or system.density, not both");
    }
    cfg.sim.box = std::cbrt(static_cast<double>(cfg.sim.n_particles) / density);
  }
  if (cfg.sim.n_particles < 1) throw Error(ErrorKind::parse_error, std::string(origin) + ": system.n must be positive");
  return cfg;
}

ParsedConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io_error, "cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.string());
}

}  // namespace ewaldmd
