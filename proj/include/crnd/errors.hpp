#pragma once

#include <stdexcept>
#include <string>

namespace crnd {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Sample variance is zero where a correlation estimate needs it.
class DegenerateVariance : public DomainError {
public:
  using DomainError::DomainError;
};

/// Sequence shorter than a test's minimum length.
class InsufficientData : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: files, lengths, configuration.
class InputError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Request exceeds the scale an exhaustive routine supports.
class ScaleError : public std::length_error {
public:
  using std::length_error::length_error;
};

}  // namespace crnd
