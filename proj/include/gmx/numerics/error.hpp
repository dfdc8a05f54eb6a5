#pragma once

#include <stdexcept>
#include <string>

namespace gmx {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor or dataset shapes do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A computation produced NaN or Inf.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value (range, missing field, unknown key).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Payload kind does not support the requested operation.
class KindError : public Error {
 public:
  using Error::Error;
};

/// Dataset role does not allow the requested operation, e.g. client code
/// touching target labels.
class RoleError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A theorem setup violates one of its stated assumptions.
class AssumptionError : public Error {
 public:
  using Error::Error;
};

}  // namespace gmx
