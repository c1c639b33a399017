#pragma once

#include <stdexcept>
#include <string>

namespace vtn {

// Inputs whose dimensions do not line up (image vs. flow, pred vs. gt, ...).
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Malformed files. Messages name the offending path and, for binary
// formats, the byte offset of the first bad byte.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numeric breakdown at run time (non-finite values, degenerate systems).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace vtn
