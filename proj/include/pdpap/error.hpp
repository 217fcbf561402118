#pragma once

#include <stdexcept>
#include <string>

namespace pdpap {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Vector or bundle sizes do not match the grid or system they are used with.
class SizeMismatch : public Error {
public:
  using Error::Error;
};

/// A coefficient left the region where the assembled operator is guaranteed SPD.
class CoercivityError : public Error {
public:
  using Error::Error;
};

/// Factorization of a system matrix failed.
class SingularSystem : public Error {
public:
  using Error::Error;
};

/// An iterative update could not be carried out (zero pivot, zero curvature).
class SolverBreakdown : public Error {
public:
  using Error::Error;
};

/// Invalid configuration: parameters out of range, inconsistent families, parse errors.
class ConfigError : public Error {
public:
  using Error::Error;
};

} // namespace pdpap
