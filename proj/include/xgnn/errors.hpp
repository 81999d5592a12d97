#pragma once

#include <stdexcept>
#include <string>

namespace xgnn {

// Bad user input (unknown key, invalid value, unknown preset). CLI exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite objective or failed solve that could not be recovered. CLI exit code 1.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace xgnn
