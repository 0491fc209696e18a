#pragma once

#include <stdexcept>
#include <string>

namespace nvbath {

// Caller supplied something outside an operation's domain.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Register too large for the dense oracle.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// A numerical routine produced a result that indicates an invalid state.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Quadrature grid does not reach the filter harmonics it needs.
class CoverageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed config, CSV or matrix file.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nvbath
