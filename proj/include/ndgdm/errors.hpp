#pragma once

#include <stdexcept>
#include <string>

namespace ndgdm {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid user-facing configuration (degrees, penalty, experiment setup).
struct ConfigError : Error {
  using Error::Error;
};

/// Invalid problem data (nonpositive diffusion, mismatched sizes).
struct DataError : Error {
  using Error::Error;
};

/// Malformed input file; message carries the line number.
struct ParseError : Error {
  using Error::Error;
};

/// Non-conforming mesh topology.
struct TopologyError : Error {
  using Error::Error;
};

/// Infeasible partition or agglomeration request.
struct PartitionError : Error {
  using Error::Error;
};

/// Cholesky factorization hit a nonpositive pivot.
struct FactorizationError : Error {
  using Error::Error;
};

/// Loss of positive definiteness detected inside an iteration.
struct DefinitenessError : Error {
  using Error::Error;
};

/// Iterative solver failed to converge within its budget.
struct SolveFailure : Error {
  using Error::Error;
};

}  // namespace ndgdm
