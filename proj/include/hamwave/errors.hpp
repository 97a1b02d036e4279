#pragma once

#include <stdexcept>
#include <string>

namespace hamwave {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A caller violated a documented precondition.
struct InvalidArgument : Error {
  using Error::Error;
};

/// The requested operation is outside the supported feature set
/// (e.g. Halton points on a disk, derivative order exceeding smoothness).
struct Unsupported : Error {
  using Error::Error;
};

/// Required history / cached state is missing for the requested step.
struct StateError : Error {
  using Error::Error;
};

/// A dense factorization failed or detected rank deficiency.
struct FactorizationError : Error {
  FactorizationError(const std::string& what, int numerical_rank,
                     double condition_estimate = 0.0)
      : Error(what), rank(numerical_rank), cond_estimate(condition_estimate) {}
  int rank;
  double cond_estimate;
};

/// A shifted diagonal c_i^2 + lambda*s_i^2 vanished during a solve.
struct SingularShift : Error {
  SingularShift(const std::string& what, int offending_index)
      : Error(what), index(offending_index) {}
  int index;
};

/// The Newton/secant multiplier update lost its slope.
struct StalledDerivative : Error {
  using Error::Error;
};

}  // namespace hamwave
