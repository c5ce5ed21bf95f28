#pragma once

#include <stdexcept>
#include <string>

namespace fwdegen {

/// Bad user input: parameters, options, configuration documents.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation left its domain of validity or failed to converge.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// sigma0 + sigma1 * x fell below the nondegeneracy threshold.
class DegenerateDiffusionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fwdegen
