#pragma once

#include <stdexcept>
#include <string>

namespace mlfd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A series that only converges for |z| < 1 was asked to sum at z >= 1.
class DivergenceError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// The result is finite but not representable as a double; use the log-domain variant.
class OverflowError : public Error {
 public:
  using Error::Error;
};

/// A series could not be truncated to the target accuracy within the term budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Malformed grouped-frequency input (CSV rows, duplicate values, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Fitting could not be carried out (degenerate data, non-nested models, ...).
class FitError : public Error {
 public:
  using Error::Error;
};

}  // namespace mlfd
