#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>

#include "ewaldmd/sim_driver.hpp"

namespace ewaldmd {

// INI-style run configuration:
//
//   [system]  n, box, density
//   [ewald]   tolerance, alpha, r_cutoff, enabled
//   [lj]      sigma, epsilon, cutoff, enabled
//   [run]     dt, steps, threads, seed, velocity_scale
//
// Keys are `section.key`; unknown keys, malformed lines and type mismatches
// raise parse errors naming the line.
struct ParsedConfig {
  SimConfig sim;
  std::set<std::string> keys;  // qualified keys present in the file

  bool has(std::string_view key) const { return keys.count(std::string(key)) != 0; }
};

ParsedConfig parse_config_text(std::string_view text, std::string_view origin = "<config>");
ParsedConfig parse_config(const std::filesystem::path& path);

}  // namespace ewaldmd
