#pragma once

#include <stdexcept>
#include <string>

namespace screwdisloc {

/// Invalid or inconsistent run configuration (CLI exit code 3).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Base class for failures of a numerical procedure (CLI exit code 2).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An eigenvalue came within tolerance of the Fermi level.
class GapClosureError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// An estimator failed to settle near an integer.
class ConvergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Branch tracking across the kz grid could not pair eigenstates.
class AmbiguousMatchingError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace screwdisloc
