#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace asse {

/// Argument outside the mathematical domain of a function or distribution.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Mismatched dimensions between vectors, matrices or multi-indices.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An operation received no data to work on.
class EmptyDataError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Fewer samples than a statistic needs.
class InsufficientDataError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Reference data without spread, so a normalized quantity is undefined.
class DegenerateDataError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// An operation was called before the object was ready for it.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Experiment configuration is inconsistent or references missing data.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Text input could not be parsed. `line()` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace asse
