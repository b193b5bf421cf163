#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cone_spde {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Index or count outside its admissible range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Operands of incompatible dimension.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation (t < 0, lambda <= beta, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration document or parameter combination.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A grid search hit the edge of its search box; widen the radius.
class ResolutionError : public Error {
 public:
  ResolutionError(const std::string& what, double suggested_radius)
      : Error(what), suggested_radius_(suggested_radius) {}
  double suggested_radius() const noexcept { return suggested_radius_; }

 private:
  double suggested_radius_;
};

/// Non-finite intermediate value.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Simulated path exceeded the overflow guard.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t step)
      : Error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Requested dimension is not supported by the chosen algorithm.
class UnsupportedDimensionError : public Error {
 public:
  using Error::Error;
};

/// Broken internal contract (e.g. a sampler produced a point outside the cone).
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace cone_spde
