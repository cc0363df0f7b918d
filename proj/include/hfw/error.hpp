#pragma once

#include <stdexcept>
#include <string>

namespace hfw {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid or inconsistent model input.
struct ParameterError : Error {
  using Error::Error;
};

// Series truncation cannot meet the requested tolerance.
struct AccuracyError : Error {
  using Error::Error;
};

// Step size violates dt * total rate <= 1.
struct StabilityError : Error {
  using Error::Error;
};

// State space too large for an enumerated computation.
struct SizeError : Error {
  using Error::Error;
};

// Operation refused for this input (e.g. duality outside the Fisher-Wright case).
struct UnsupportedError : Error {
  using Error::Error;
};

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ParameterError(msg);
}

}  // namespace hfw
