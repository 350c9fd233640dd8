#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cgap {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error
{
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent model input. The CLI maps this family to exit code 2.
class ModelError : public Error
{
 public:
  using Error::Error;
};

class UnsupportedVariantError : public ModelError
{
 public:
  using ModelError::ModelError;
};

class EmptySpaceError : public ModelError
{
 public:
  using ModelError::ModelError;
};

class InvalidPairError : public ModelError
{
 public:
  using ModelError::ModelError;
};

class ShapeError : public ModelError
{
 public:
  using ModelError::ModelError;
};

class DomainError : public ModelError
{
 public:
  using ModelError::ModelError;
};

/// Model-spec file could not be parsed; `what()` carries line/column when known.
class SpecParseError : public ModelError
{
 public:
  using ModelError::ModelError;
};

/// The generator splits the state space into more than one communicating class.
class ReducibleError : public ModelError
{
 public:
  ReducibleError(const std::string& msg, std::size_t components)
      : ModelError(msg), components_(components)
  {
  }
  std::size_t components() const { return components_; }

 private:
  std::size_t components_;
};

class ConvergenceError : public Error
{
 public:
  ConvergenceError(const std::string& msg, std::size_t iterations)
      : Error(msg), iterations_(iterations)
  {
  }
  std::size_t iterations() const { return iterations_; }

 private:
  std::size_t iterations_;
};

/// Autocorrelation fit impossible in the requested lag window.
class FitWindowError : public Error
{
 public:
  using Error::Error;
};

}  // namespace cgap
