#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ewaldmd {

enum class ErrorKind {
  invalid_argument,
  cutoff_too_large,
  contract_violation,
  box_too_small,
  kspace_empty,
  coincident_particles,
  neutrality_violation,
  too_large_for_oracle,
  invalid_lattice,
  parse_error,
  io_error,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace ewaldmd
