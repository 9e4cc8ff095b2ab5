#pragma once

#include <stdexcept>
#include <string>

namespace teamprod {

// Exit-code families used by the CLI: config 2, data 3, numerical 4.

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Zero denominators, too few triplets, empty samples.
class DegenerateData : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Identification rank condition failed on the sample.
class IdentificationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace teamprod
