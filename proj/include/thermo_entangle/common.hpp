#pragma once

#include <stdexcept>
#include <string>

namespace thermo_entangle {

/// Base class for every error this library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Cholesky pivot failure; carries the offending diagonal index.
class NotPositiveDefiniteError : public Error {
 public:
  NotPositiveDefiniteError(int pivot_index, double pivot_value)
      : Error("matrix is not positive definite: pivot " + std::to_string(pivot_index) +
              " = " + std::to_string(pivot_value)),
        pivot_index_(pivot_index) {}

  int pivot_index() const { return pivot_index_; }

 private:
  int pivot_index_;
};

/// Iteration budget exhausted; carries the residual that was reached.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}

  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Two inputs that must describe the same state disagree.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace thermo_entangle
