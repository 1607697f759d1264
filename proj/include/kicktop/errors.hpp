#pragma once

#include <stdexcept>
#include <string>

namespace kicktop {

/// Input outside the documented domain of an operation (bad j, p != pi/2 on
/// the classical side, dimension mismatch, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Base for failures of a numerical procedure on otherwise valid input.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The fixed-point normalization condition has no nontrivial root.
class NoRoot : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Two distinct orbit points coincide, so no finite spin makes their
/// coherent states orthogonal.
class NoFiniteJ : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A point list handed in as a periodic orbit does not close under the map.
class ClosureError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace kicktop
