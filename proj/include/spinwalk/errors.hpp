#pragma once

#include <stdexcept>
#include <string>

namespace spinwalk {

/// Invalid experiment configuration (bad parameters, malformed config JSON).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A request exceeds the hard size limits of an engine (bath too large,
/// string length over the enumeration cap). The engine refuses instead of
/// silently degrading.
struct EngineLimitError : std::runtime_error {
  explicit EngineLimitError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed on-disk data (records file, CSV input).
struct DataFormatError : std::runtime_error {
  explicit DataFormatError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Coupling-scale calibration could not bracket the target.
struct CalibrationError : std::runtime_error {
  explicit CalibrationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Adaptive quadrature failed to reach the requested tolerance.
struct QuadratureError : std::runtime_error {
  explicit QuadratureError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace spinwalk
