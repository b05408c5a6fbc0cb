#pragma once

#include <stdexcept>
#include <string>

namespace glmcomb {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated a documented precondition (bad parameter, invalid
/// preprocessor, inconsistent inputs).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine produced a non-finite value or failed to converge.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unknown configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace glmcomb
