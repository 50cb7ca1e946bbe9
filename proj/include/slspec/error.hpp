#pragma once

#include <stdexcept>
#include <string>

namespace slspec {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: unparsable configuration, violated preconditions, invalid ranges.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure could not deliver a result at the requested accuracy.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class PropagationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The m-function denominator is (numerically) zero at the requested point.
class PoleProximityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The boundary-value extrapolation of Im m did not settle.
class PoleContaminatedError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class UnresolvedAsymptoticsError : public NumericalError {
 public:
  UnresolvedAsymptoticsError(const std::string& what, std::string tail)
      : NumericalError(what), tail_(std::move(tail)) {}
  /// Printable listing of the last samples of the offending sequence.
  const std::string& tail() const noexcept { return tail_; }

 private:
  std::string tail_;
};

/// A sign change could not be isolated; usually a double root.
class BracketError : public NumericalError {
 public:
  BracketError(const std::string& what, double location)
      : NumericalError(what), location_(location) {}
  double location() const noexcept { return location_; }

 private:
  double location_;
};

/// Two independent routes to the same quantity disagree.
class CrossCheckError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace slspec
