#pragma once

#include <stdexcept>
#include <string>

namespace readout {

// Configuration-side failures: bad plans, malformed inputs, requests that are
// too large to enumerate. The CLI maps these to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failures of the numerics themselves. The CLI maps these to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateProblemError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class PlanError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class InvalidDistributionError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class IncompleteStatsError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class IncompleteKernelError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class TractabilityError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class ParseError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class NumericalInstabilityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace readout
