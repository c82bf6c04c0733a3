#pragma once

#include <stdexcept>
#include <string>

namespace szego {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Index, rank or cutoff outside the valid range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// A function was evaluated outside its domain (log of a non-positive
/// value, off-sphere point, ...). Carries the offending value.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, double value) : Error(what), value_(value) {}
  explicit DomainError(const std::string& what) : Error(what), value_(0.0) {}

  double value() const noexcept { return value_; }

 private:
  double value_;
};

/// An operation needing a strictly positive operator or symbol got one that
/// is not.
class PositivityError : public DomainError {
 public:
  using DomainError::DomainError;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Basis size or expansion size exceeds the configured safety cap.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

class Unsupported : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. `line` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& detail)
      : Error(path + (line ? ":" + std::to_string(line) : std::string()) + ": " + detail),
        path_(path),
        line_(line) {}

  const std::string& path() const noexcept { return path_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

/// An identity that must hold exactly was found violated. Always a bug.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

/// Eigensolver did not converge.
class SpectralError : public Error {
 public:
  using Error::Error;
};

}  // namespace szego
