#pragma once

#include <stdexcept>
#include <string>

namespace hyperrfk {

/// Argument outside the mathematical domain of an operation (r <= 0, |x| >= 1, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A hypothesis of an inequality check is not met (non-convex body, p <= 1, ...).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Floating-point breakdown: NaN, failed factorization, non-finite derivative.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bracket search for a root or eigenvalue failed.
class SearchError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Iterative method hit its iteration cap; carries the last iterate's value.
class IterationLimitError : public NumericError {
 public:
  IterationLimitError(const std::string& what, double last_value)
      : NumericError(what), last_value_(last_value) {}
  double last_value() const noexcept { return last_value_; }

 private:
  double last_value_;
};

/// An identity that must hold by construction (terminal quermass convention,
/// Gauss-Bonnet, resolution agreement) failed beyond tolerance.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tabulated input is unusable (vanishing parallel length, mismatched ranges).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed specification file.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hyperrfk
