#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace stokes {

/// Base for all library failures. Callers that only care about "something
/// numerical went wrong" can catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input outside the region where an operation is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Caller broke an operation's precondition (invalid indices, bad tolerances).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// The adaptive integrator could not reach the requested tolerance.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, std::complex<double> position)
      : Error(what), position_(position) {}

  std::complex<double> position() const noexcept { return position_; }

 private:
  std::complex<double> position_;
};

/// A quantity that must hold by construction did not (e.g. W_{0,1} vanished).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Root search failures: contour hit a zero after all nudges, refinement cap.
class RootFinderError : public Error {
 public:
  using Error::Error;
};

}  // namespace stokes
