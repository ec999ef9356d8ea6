#pragma once

#include <stdexcept>
#include <string>

namespace hjplace {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A scene, grid or configuration violates one of its invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Solver parameters out of range (e.g. ξ_max ≥ 1).
class ConfigurationError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// The requested start cannot reach the destination.
class UnreachableError : public Error {
 public:
  using Error::Error;
};

}  // namespace hjplace
