#pragma once

#include <stdexcept>
#include <string>

namespace hflow {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input violates a mathematical precondition (non-Hermitian operator, zero
// operator, invalid probability weights, ...).
struct DomainError : Error {
    using Error::Error;
};

// Operation only implemented for a specific Hilbert space dimension.
struct UnsupportedDimensionError : Error {
    using Error::Error;
};

// Scenario parameters violate a physical constraint.
struct ConstraintError : Error {
    using Error::Error;
};

// An intermediate map Phi_{t,s} does not exist because Phi_s is not
// numerically invertible; divisibility is ill-defined there.
struct DivisibilityUndefinedError : Error {
    using Error::Error;
};

// Requested time does not lie on the integration grid.
struct GridError : Error {
    using Error::Error;
};

// Configuration file cannot be parsed or validated.
struct ConfigError : Error {
    using Error::Error;
};

// Numerical failure at runtime (e.g. no intermediate map defined anywhere).
struct NumericalError : Error {
    using Error::Error;
};

}  // namespace hflow
