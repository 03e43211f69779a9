#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace stable_inv {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument shapes or preconditions violated by the caller.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// An evaluator produced NaN/Inf; `block()` names the offending block.
class NumericFailure : public Error {
 public:
  NumericFailure(const std::string& block, const std::string& what)
      : Error(what + " [block: " + block + "]"), block_(block) {}
  const std::string& block() const { return block_; }

 private:
  std::string block_;
};

/// Newton-type iteration did not reach its tolerance.
class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, std::vector<double> history)
      : Error(what), history_(std::move(history)) {}
  const std::vector<double>& residual_history() const { return history_; }
  double last_residual() const { return history_.empty() ? 0.0 : history_.back(); }

 private:
  std::vector<double> history_;
};

/// Kinematic or input-output singularity (vanishing coupling, undefined angle, ...).
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Spectrum has an eigenvalue on the imaginary axis.
class HyperbolicityError : public Error {
 public:
  using Error::Error;
};

/// Boundary-condition row count does not match the discretization.
class SquarenessError : public Error {
 public:
  SquarenessError(std::size_t expected, std::size_t provided)
      : Error("boundary condition count mismatch: expected " + std::to_string(expected) +
              " rows, provided " + std::to_string(provided)),
        expected_(expected),
        provided_(provided) {}
  std::size_t expected() const { return expected_; }
  std::size_t provided() const { return provided_; }

 private:
  std::size_t expected_;
  std::size_t provided_;
};

/// Newton matrix could not be factorized.
class RankDeficiency : public Error {
 public:
  using Error::Error;
};

/// Initial state violates the constraints.
class InconsistentInitialConditions : public Error {
 public:
  using Error::Error;
};

/// Time step whose Newton iteration failed.
class StepFailure : public Error {
 public:
  StepFailure(double time, const std::string& what)
      : Error("step at t = " + std::to_string(time) + " failed: " + what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// Invalid experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace stable_inv
