#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rashomon {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition or configuration violation.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Column count or names do not match what a model or dataset expects.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Design matrix is rank deficient.
class SingularError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. `line()` is 1-based; 0 when the error is not tied
/// to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace rashomon
