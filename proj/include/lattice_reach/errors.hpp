#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lattice_reach {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree (vector lengths, matrix columns, ...).
class DimensionError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The whole polytope lies on the splitting hyperplane within tolerance.
class DegenerateSplitError : public Error {
 public:
  DegenerateSplitError()
      : Error("degenerate split: every vertex lies on the hyperplane") {}
};

/// Region count exceeded the configured cap.
class ResourceLimitError : public Error {
 public:
  using Error::Error;
};

/// Malformed network or property input. Carries the 1-based line number
/// when the error can be attributed to a line (0 otherwise).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

namespace detail {

inline void require_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw DimensionError(std::string(what) + ": expected dimension " +
                         std::to_string(want) + ", got " + std::to_string(got));
  }
}

}  // namespace detail
}  // namespace lattice_reach
