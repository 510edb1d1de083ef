#pragma once

#include <stdexcept>
#include <string>

namespace homog {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or malformed description (unknown family, bad parameter).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// T/eps or eps/h is not an integer.
class CommensurabilityError : public Error {
 public:
  using Error::Error;
};

/// Adaptive quadrature did not reach its tolerance.
class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double achieved_error)
      : Error(what + " (achieved error estimate " + std::to_string(achieved_error) + ")"),
        achieved_error_(achieved_error) {}
  double achieved_error() const noexcept { return achieved_error_; }

 private:
  double achieved_error_;
};

/// Fields or stencils defined on different grids were combined.
class GridMismatch : public Error {
 public:
  using Error::Error;
};

/// A hypothesis of the model is violated at a sampled point (e.g. p(z) = 0 where a ratio is needed).
class HypothesisViolation : public Error {
 public:
  using Error::Error;
};

/// Configuration file problems; the message carries the location.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace homog
