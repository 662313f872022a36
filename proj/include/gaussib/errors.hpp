#pragma once

#include <stdexcept>
#include <string>

namespace gaussib {

/// Base class for all gaussib errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A marginal spectrum is zero or negative at a frequency where the
/// cross-spectrum is nonzero.
class NonPositiveSpectrum : public Error {
 public:
  using Error::Error;
};

/// The requested bottleneck rate cannot be met (e.g. the SNR spectrum is
/// identically zero).
class UnachievableRate : public Error {
 public:
  using Error::Error;
};

/// An iterative solver did not reach its tolerance within the iteration cap.
class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

/// The Toeplitz normal equations are numerically singular.
class SingularSystem : public Error {
 public:
  using Error::Error;
};

/// log det argument is singular or indefinite.
class SingularArgument : public Error {
 public:
  using Error::Error;
};

/// A noise covariance is numerically singular (correlation at or above 1).
class SingularNoise : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration or input file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A source model violates a structural invariant.
class ModelError : public Error {
 public:
  using Error::Error;
};

}  // namespace gaussib
