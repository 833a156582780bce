#pragma once

#include <stdexcept>
#include <string>

namespace curvgate {

// Shape or contract violation in the inputs (wrong dimension, broken symmetry).
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A point or parameter left the region where an object is defined.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Ill-conditioned or non-convergent numerics.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace curvgate
