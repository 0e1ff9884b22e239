#pragma once

#include <stdexcept>
#include <string>

namespace vpfp {

/// Base class for every error raised by the solver library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: configuration, expressions, out-of-range parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Errors raised by the numerical kernels (linear solves, Newton loops).
class SolverError : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public SolverError {
 public:
  NonConvergence(const std::string& what, double last_residual)
      : SolverError(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

class IncompatibleRhs : public SolverError {
 public:
  using SolverError::SolverError;
};

class SingularSystem : public SolverError {
 public:
  using SolverError::SolverError;
};

class FactorizationFailure : public SolverError {
 public:
  FactorizationFailure(const std::string& what, long pivot_index)
      : SolverError(what), pivot_index_(pivot_index) {}
  long pivot_index() const noexcept { return pivot_index_; }

 private:
  long pivot_index_;
};

/// The time loop produced NaN/Inf.
class NonFiniteState : public Error {
 public:
  NonFiniteState(const std::string& what, long step)
      : Error(what), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

/// Raised by fit_decay_rate.
class InsufficientData : public Error {
 public:
  using Error::Error;
};

class NonPositiveValues : public Error {
 public:
  using Error::Error;
};

}  // namespace vpfp
