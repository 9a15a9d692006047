#pragma once

#include <stdexcept>
#include <string>

namespace fwadapt {

/// A point is outside the domain of a reference function or objective
/// (e.g. a nonpositive coordinate under Burg entropy).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The information matrix of a D-optimal design is not positive definite.
class SingularMatrixError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Malformed user input: bad dimensions, non-finite entries, invalid config.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A sampled or iterative estimator could not produce a value.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be opened, written or read.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fwadapt
