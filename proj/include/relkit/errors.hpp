#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace relkit {

// Base class for every error thrown by this library. Payload-carrying
// subclasses exist so callers (CLI exit codes, tests) can branch without
// parsing messages.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A requested construction would exceed a configured size budget.
// `count` is what the construction would have needed; `delta` is the
// quantization scale that led there (NaN when not applicable).
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& msg, std::size_t count, double delta)
      : Error(msg), count(count), delta(delta) {}
  std::size_t count;
  double delta;
};

// A build finished but its measured held-out error exceeded the target.
class CertificationFailure : public Error {
 public:
  CertificationFailure(const std::string& msg, double measured, double target)
      : Error(msg), measured(measured), target(target) {}
  double measured;
  double target;
};

// Bisection could not find a quantization scale with small enough
// empirical modulus of continuity.
class ContinuityViolation : public Error {
 public:
  ContinuityViolation(const std::string& msg, double target, double best)
      : Error(msg), target(target), best_modulus(best) {}
  double target;
  double best_modulus;
};

// Gram eigenvalue below the clipping band: the kernel is not PSD.
class NotPsd : public Error {
 public:
  NotPsd(const std::string& msg, double min_eig, double max_eig)
      : Error(msg), min_eigenvalue(min_eig), max_eigenvalue(max_eig) {}
  double min_eigenvalue;
  double max_eigenvalue;
};

// No truncation level within the landmark count reaches the tolerance.
class SpectrumTooFlat : public Error {
 public:
  SpectrumTooFlat(const std::string& msg, double residual)
      : Error(msg), residual(residual) {}
  double residual;
};

// A feature-pair's declared tail at its cap is too large for the target.
class TailTooHeavy : public Error {
 public:
  TailTooHeavy(const std::string& msg, double residual)
      : Error(msg), residual(residual) {}
  double residual;
};

// A filtered point escaped its declared feature box.
class DomainViolation : public Error {
 public:
  DomainViolation(const std::string& msg, Eigen::VectorXd point)
      : Error(msg), point(std::move(point)) {}
  Eigen::VectorXd point;
};

// Every sampled margin was zero: the utility cannot rank the context.
class ZeroMargin : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace relkit
