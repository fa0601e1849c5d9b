#pragma once

#include <stdexcept>
#include <string>

namespace eight {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or violated precondition (bad tolerance, unnormalized shape, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Two or three bodies coincide where the operation needs them apart.
class CollisionError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver did not reach its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_value)
      : Error(what), last_value_(last_value) {}
  double last_value() const noexcept { return last_value_; }

 private:
  double last_value_;
};

/// Step size fell below the representable limit during integration.
class StepUnderflowError : public Error {
 public:
  StepUnderflowError(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace eight
