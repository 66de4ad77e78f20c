#pragma once

#include <stdexcept>
#include <string>

namespace kflow {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape or size mismatch between operands.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A precondition on a value was violated (range, symmetry, band id, ...).
class ValueError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or a failed numerical guard.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed or incompatible file content.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace kflow
