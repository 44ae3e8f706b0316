#pragma once

#include <stdexcept>
#include <string>

namespace povspace {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input could not be opened, read, or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A declared column is missing or a header is malformed.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Input data violates a domain invariant (negative value, duplicate key...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed or its preconditions do not hold.
class ComputationError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration or command line.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace povspace
