#pragma once

#include <stdexcept>
#include <string>

namespace semiflow {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dimension or shape mismatch between values that must agree.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Invalid or inconsistent configuration (specs, flags, file schemas).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or other numeric breakdown during evaluation.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Adaptive solver exceeded its step budget.
class StiffnessError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Problem size above a configured cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Input outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed persisted data.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace semiflow
