#pragma once

#include <stdexcept>
#include <string>

namespace sublift {

// Bad parameters, malformed input files, inconsistent shapes.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failure inside an iterative method (divergence, iteration cap).
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sublift
