#pragma once

#include <stdexcept>
#include <string>

namespace seqasip {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An invalid map, schedule, observable or config value.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A branch inverse could not be solved to the required residual.
class InverseNotConverged : public Error {
 public:
  using Error::Error;
};

/// Power iteration did not settle, or settled on a non-unique fixed point.
class NonConvergence : public Error {
 public:
  using Error::Error;
};

/// A cell of the pushed-forward density fell below the configured floor.
class DenominatorTooSmall : public Error {
 public:
  using Error::Error;
};

/// A P-power series did not decay (estimated contraction rate >= 1).
class NonConvergentTail : public Error {
 public:
  using Error::Error;
};

class DegenerateVariance : public Error {
 public:
  using Error::Error;
};

/// On-disk container failed validation.
class CacheCorrupt : public Error {
 public:
  using Error::Error;
};

}  // namespace seqasip
