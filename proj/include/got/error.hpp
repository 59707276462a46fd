#pragma once

#include <stdexcept>
#include <string>

namespace got {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Incompatible tensor shapes; the message names both shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Imported JSON payload does not match the expected schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// An operation received empty input where non-empty input is required.
class EmptyInputError : public Error {
 public:
  using Error::Error;
};

/// A masked softmax was asked to normalize over an empty support set.
class EmptySupportError : public Error {
 public:
  using Error::Error;
};

/// An imported payload references an entity that does not exist.
class UnknownReferenceError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or invalid configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A numeric computation produced a non-finite value; names the op.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Failure reading or writing files.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace got
