#pragma once

#include <stdexcept>
#include <string>

namespace collide1d {

/// Invalid argument or parameter outside its domain.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Two particles share a velocity (or position) where distinct values are required.
class DegenerateInputError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// The system is not yet sorted at the requested time.
class NotYetSortedError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Base for failures of a numerical procedure on valid input.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class QuadratureError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonterminationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class InvariantViolation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace collide1d
