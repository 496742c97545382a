#pragma once

#include <stdexcept>
#include <string>

namespace radiotomo {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller passed an argument that violates a documented precondition
/// (bad dimensions, coincident link endpoints, nonpositive precision, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A computation produced a value that the model forbids: a nonpositive
/// variance or precision, a non-finite objective, a singular system.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The VB iteration produced a non-finite ELBO.
class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, int iteration)
      : NumericalError(what), iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

/// File could not be read, written or parsed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace radiotomo
