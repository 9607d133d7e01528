#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace jumppat {

using Index = std::ptrdiff_t;

// Numeric tolerances shared across the library. Defaults are sized for
// Hilbert dimensions up to d = 64 (superoperators up to 4096x4096).
struct Tolerances {
    double tol_rank = 1e-10;  // relative singular-value cutoff for rank decisions
    double cond_max = 1e12;   // eigenvector-matrix condition limit for diagonalizability
    double tol_psd = 1e-10;   // allowed negative-eigenvalue slack in density checks
    double tol_match = 1e-5;  // trace-distance radius for approximate state matching
};

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad user input or configuration. CLI exit code 2.
struct ConfigError : Error {
    using Error::Error;
};

// Numeric failure: non-convergence, degeneracy, singular operators. CLI exit code 3.
struct NumericError : Error {
    using Error::Error;
};

struct DimensionError : NumericError {
    using NumericError::NumericError;
};

// A kernel or steady state is not one-dimensional.
struct DegeneracyError : NumericError {
    using NumericError::NumericError;
};

struct SingularMatrixError : NumericError {
    using NumericError::NumericError;
};

// The no-click generator is singular: some subspace never emits a monitored click.
struct DarkSubspaceError : NumericError {
    using NumericError::NumericError;
};

// A state assigns zero weight to every monitored channel.
struct DarkStateError : NumericError {
    using NumericError::NumericError;
};

// Conditioning on an impossible history.
struct ConditioningError : NumericError {
    using NumericError::NumericError;
};

// Enumeration or resource budget exceeded. CLI exit code 4.
struct CapExceededError : Error {
    using Error::Error;
};

}  // namespace jumppat
