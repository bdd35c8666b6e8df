#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pts {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument value or violated precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Degenerate input, e.g. an all-zero matrix where a scale is required.
class DegenerateInput : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Base for failures of the numerics rather than of the caller.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class SingularSystem : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Power sums left the representable range. Use the Chebyshev basis instead.
class NumericalRange : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConvergenceFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class PositivityFailure : public NumericalError {
 public:
  PositivityFailure(const std::string& what, std::size_t iteration)
      : NumericalError(what), iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

/// Malformed input data (file contents, not arguments).
class DataError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pts
