#pragma once

#include <stdexcept>
#include <string>

namespace mbt {

/// Bad configuration: rejected before any stepping starts.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Failure while a simulation is running; carries the simulation time.
struct SolverError : std::runtime_error {
  double t{0.0};
  SolverError(const std::string& what, double t_) : std::runtime_error(what + " (t=" + std::to_string(t_) + ")"), t(t_) {}
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mbt
