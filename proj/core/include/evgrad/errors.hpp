#pragma once

#include <stdexcept>
#include <string>

namespace evgrad {

// Invalid experiment or network configuration (bad layer sizes, evv with K < 2, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Vector length does not match what a network or environment expects.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A documented precondition was violated by the caller.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Exhaustive enumeration would exceed the leaf budget.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An epoch produced non-finite parameters.
class TrainingAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed config file; the message carries the line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace evgrad
