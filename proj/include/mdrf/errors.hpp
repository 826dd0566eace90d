#pragma once

#include <stdexcept>
#include <string>

namespace mdrf {

/// Base for every error raised by the library. The CLI maps subclasses to
/// exit codes (see tools/mdrf_cli.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A point was handed to an operation outside the domain it was configured for.
class OutOfDomain : public Error {
 public:
  using Error::Error;
};

/// Non-finite values, failed factorizations, divergence.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Caller broke a precondition that is not a plain bad argument, e.g. asked a
/// residual for a derivative the jets were not built with.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// A model was asked for a variable it has no data for.
class NoData : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Config or snapshot failed schema validation. `path` is a JSON pointer.
class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace mdrf
