#pragma once

#include <stdexcept>
#include <string>

namespace threshlasso {

/// Base class for all recoverable library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent user input (CLI exit code 1).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Threshold band holds too few distinct values of q to build a grid.
class DegenerateGridError : public InputError {
 public:
  using InputError::InputError;
};

/// Numerical estimation failed (CLI exit code 2).
class EstimationError : public Error {
 public:
  using Error::Error;
};

/// A nodewise target column is identically zero inside its regime.
class DegenerateColumnError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

/// Joint test could not be formed (singular covariance block).
class TestError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

/// Caller violated a documented precondition.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

void require(bool cond, const std::string& what);  // throws ContractError

}  // namespace threshlasso
