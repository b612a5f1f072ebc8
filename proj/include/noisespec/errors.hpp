#pragma once

#include <stdexcept>
#include <string>

namespace noisespec {

/// Invalid input: mismatched grids, bad dimensions, malformed files.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class GridMismatch : public ValidationError {
 public:
  GridMismatch() : ValidationError("grid mismatch") {}
  explicit GridMismatch(const std::string& what) : ValidationError("grid mismatch: " + what) {}
};

class DimensionMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A dense representation would exceed the configured cell-count cap.
class CapExceeded : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// The requested operation has no implementation for this backend.
class Unsupported : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A computation ran but its result violates a declared tolerance.
class ToleranceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace noisespec
