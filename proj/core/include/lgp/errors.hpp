#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace lgp {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite or otherwise invalid numerical input.
class DomainError : public Error {
 public:
  using Error::Error;
};

class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or hyperparameters (bad shapes, non-SPD metrics,
/// degenerate equilibrium block, unknown config keys).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: a factorization or integration could not complete.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IllConditionedError : public NumericalError {
 public:
  IllConditionedError(const std::string& what, double condition_estimate)
      : NumericalError(what), condition_estimate_(condition_estimate) {}

  [[nodiscard]] double condition_estimate() const noexcept { return condition_estimate_; }

 private:
  double condition_estimate_;
};

/// The state left the domain on which the learned dynamics are defined.
class DomainExitError : public NumericalError {
 public:
  DomainExitError(const std::string& what, Eigen::VectorXd q, double lambda_min)
      : NumericalError(what), q_(std::move(q)), lambda_min_(lambda_min) {}

  [[nodiscard]] const Eigen::VectorXd& q() const noexcept { return q_; }
  [[nodiscard]] double lambda_min() const noexcept { return lambda_min_; }

 private:
  Eigen::VectorXd q_;
  double lambda_min_;
};

class OptimizationFailed : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// An internally computed quantity broke an invariant it is guaranteed to hold.
class InternalConsistencyError : public Error {
 public:
  using Error::Error;
};

/// A proven inequality failed numerically. Never caught inside the library.
class TheoremViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace lgp
