#pragma once

#include <stdexcept>
#include <string>

namespace per {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed call: dimension mismatch, class index out of range.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Bad configuration (missing class, invalid hyperparameter).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Unreadable or corrupt file contents.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Numeric failure: non-finite values, undefined ratios, vacuous bounds.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace per
