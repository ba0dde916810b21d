#pragma once

#include <stdexcept>
#include <string>

namespace lada {

/// Malformed configuration or CLI usage. Maps to process exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (parse failures, BIO violations,
/// missing files). Maps to process exit code 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Tensor operands whose shapes do not conform for the requested primitive.
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Math domain violation: log of a non-positive value, alpha <= 0, T <= 0.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Non-finite loss or other numerical breakdown. Maps to exit code 3.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace lada
