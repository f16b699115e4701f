#pragma once

#include <stdexcept>
#include <string>

namespace wavestep {

// Error taxonomy. The three bases map 1:1 onto CLI exit codes:
// ConfigError -> 2, NumericalDomainError -> 3, IoError -> 4.

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SchemaError : ConfigError {
  explicit SchemaError(const std::string& field, const std::string& what)
      : ConfigError(field + ": " + what), field_path(field) {}
  std::string field_path;
};

struct UnknownPreset : ConfigError {
  using ConfigError::ConfigError;
};

struct NumericalDomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// n^2 < 0: the requested wave does not propagate (sub-barrier regime).
struct EvanescentRegime : NumericalDomainError {
  using NumericalDomainError::NumericalDomainError;
};

struct TotalInternalReflection : NumericalDomainError {
  using NumericalDomainError::NumericalDomainError;
};

// Group velocity denominator vanished; the worldline is vertical.
struct DegenerateDispersion : NumericalDomainError {
  using NumericalDomainError::NumericalDomainError;
};

// k <= 0 passed where only right-moving incidence makes sense.
struct NonIncidentWave : NumericalDomainError {
  using NumericalDomainError::NumericalDomainError;
};

// Regional norm too small for centroid/width to be defined.
struct EmptyRegion : NumericalDomainError {
  using NumericalDomainError::NumericalDomainError;
};

struct IllConditionedFit : NumericalDomainError {
  using NumericalDomainError::NumericalDomainError;
};

// All-zero reference density; nothing to normalize a heatmap against.
struct DegenerateField : NumericalDomainError {
  using NumericalDomainError::NumericalDomainError;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace wavestep
