#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace trn {

/// Invalid solver, problem, or run configuration.
class ConfigurationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition of an operation does not hold.
class PreconditionViolation : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// An oracle or an intermediate quantity produced a NaN or an infinity.
class NonFiniteEvaluation : public std::runtime_error {
public:
  NonFiniteEvaluation(const std::string& what, Eigen::VectorXd x,
                      Eigen::VectorXd v = {})
      : std::runtime_error(what), x_(std::move(x)), v_(std::move(v)) {}

  const Eigen::VectorXd& point() const { return x_; }
  const Eigen::VectorXd& direction() const { return v_; }

private:
  Eigen::VectorXd x_;
  Eigen::VectorXd v_;
};

class LinearAlgebraError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The secular-equation iteration of the exact subproblem solver ran out of
/// iterations.
class MaxSubproblemIterations : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The predicted model decrease of a generated step is not positive.
class DegenerateModelDecrease : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Reading a configuration or writing results failed.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace trn
