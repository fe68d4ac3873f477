#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace eadlab {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated an operation's precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Numerical domain failure: log of a non-positive value, division by zero,
/// a NaN or infinite intermediate, a negative rate.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed expression source. `offset()` is the byte offset into the input.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& message)
      : Error("at offset " + std::to_string(offset) + ": " + message),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Malformed configuration document. `pointer()` is a JSON pointer to the
/// offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string pointer, const std::string& message)
      : Error(pointer + ": " + message), pointer_(std::move(pointer)) {}

  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

}  // namespace eadlab
