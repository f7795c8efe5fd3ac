#pragma once

#include <stdexcept>
#include <string>

namespace mellin_deconv {

/// A sample contained a point that is not a strictly positive finite real,
/// or was empty.
class InvalidSample : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The error density's Mellin transform vanishes (numerically) on the
/// frequency grid, so the deconvolution quotient is undefined.
class AssumptionViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mellin_deconv
