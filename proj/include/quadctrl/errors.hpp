#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace quadctrl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class DegreeCapExceeded : public Error {
 public:
  DegreeCapExceeded(int degree, int cap)
      : Error("polynomial degree " + std::to_string(degree) +
              " exceeds the configured cap " + std::to_string(cap) +
              " (set QUADCTRL_DEGREE_CAP to raise it)"),
        degree_(degree),
        cap_(cap) {}
  int degree() const { return degree_; }
  int cap() const { return cap_; }

 private:
  int degree_;
  int cap_;
};

/// A point that was expected to be an equilibrium is not one. The residual
/// f(x_e, u_e) is kept as decimal strings.
class NotEquilibrium : public Error {
 public:
  NotEquilibrium(std::string what, std::vector<std::string> residual)
      : Error(std::move(what)), residual_(std::move(residual)) {}
  const std::vector<std::string>& residual() const { return residual_; }

 private:
  std::vector<std::string> residual_;
};

class ControlDependentField : public Error {
 public:
  using Error::Error;
};

/// A bracket identity that must hold algebraically was violated.
class InconsistencyError : public Error {
 public:
  using Error::Error;
};

class InvarianceFailure : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  DivergenceError(double escape_time, double norm)
      : Error("trajectory left the ball of radius guard at t = " +
              std::to_string(escape_time) + " (|x| = " + std::to_string(norm) +
              ")"),
        escape_time_(escape_time) {}
  double escape_time() const { return escape_time_; }

 private:
  double escape_time_;
};

/// The linearized system fails the Kalman rank condition. Carries a basis of
/// the orthogonal complement of the controllable space, as strings.
class NotControllable : public Error {
 public:
  NotControllable(std::string what,
                  std::vector<std::vector<std::string>> missing)
      : Error(std::move(what)), missing_(std::move(missing)) {}
  const std::vector<std::vector<std::string>>& missing_directions() const {
    return missing_;
  }

 private:
  std::vector<std::vector<std::string>> missing_;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

/// Malformed user input (system files, control specs, CLI values).
class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace quadctrl
