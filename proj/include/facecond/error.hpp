#pragma once

#include <stdexcept>
#include <string>

namespace facecond {

// Input violates a documented invariant or precondition (CLI exit status 1).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent file content; a validation failure.
class FormatError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Geometry for which the requested quantity is undefined, e.g. coincident eye
// projections when solving for a camera.
class GeometryError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Filesystem failure (CLI exit status 2).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace facecond
