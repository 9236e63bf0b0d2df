#pragma once

#include <stdexcept>
#include <string>

namespace ndar {

// Invalid arguments, malformed files, schema violations.  CLI maps these to
// exit code 2.
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Numerical failures at run time.  CLI maps these to exit code 1.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A simulated trajectory left the guard region |y| <= 1e8.
struct DivergenceError : NumericError {
  int step;
  DivergenceError(int step_, const std::string& msg)
      : NumericError(msg), step(step_) {}
};

// Information matrix condition number above the usable range.
struct SingularInformationError : NumericError {
  using NumericError::NumericError;
};

// A standard error of exactly zero makes a Wald statistic undefined.
struct DegenerateInferenceError : NumericError {
  using NumericError::NumericError;
};

// No valid cell in an order-selection grid.
struct SelectionError : NumericError {
  using NumericError::NumericError;
};

}  // namespace ndar
