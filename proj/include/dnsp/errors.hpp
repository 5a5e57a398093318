#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dnsp {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Shapes of two operands are incompatible.
class DimensionError : public Error {
  public:
    using Error::Error;
};

/// A scalar or integer argument is outside its admissible range.
class ArgumentError : public Error {
  public:
    using Error::Error;
};

class NumericalError : public Error {
  public:
    NumericalError(const std::string& what, std::size_t iterations)
        : Error(what + " (iterations: " + std::to_string(iterations) + ")"),
          iterations_(iterations) {}

    std::size_t iterations() const noexcept { return iterations_; }

  private:
    std::size_t iterations_;
};

/// A forward cache does not belong to the parameters it is used with.
class ConsistencyError : public Error {
  public:
    using Error::Error;
};

/// Invalid combination of training options.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Malformed file contents (bad magic, unparsable header, ...).
class FormatError : public Error {
  public:
    using Error::Error;
};

/// File written by an unsupported format version.
class VersionError : public FormatError {
  public:
    using FormatError::FormatError;
};

/// File could not be opened, read or written.
class IoError : public Error {
  public:
    using Error::Error;
};

} // namespace dnsp
