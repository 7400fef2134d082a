#pragma once

#include <stdexcept>
#include <string>

namespace clab {

// Invalid configuration or malformed input. Maps to CLI exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failure (non-PD covariance, degenerate weights, singular
// matrix). Maps to CLI exit code 3.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace clab
