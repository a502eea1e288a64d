#pragma once
// Exception types shared across the library. Plain parameter-validation
// problems throw std::invalid_argument directly; the types below mark
// conditions callers may want to catch specifically (CLI exit codes,
// sweep drivers, acceptance checks).

#include <stdexcept>
#include <string>

namespace cvmdi {

// A covariance matrix (or a value derived from one) violates the bosonic
// uncertainty bound beyond numerical tolerance.
class UnphysicalStateError : public std::runtime_error {
  public:
    explicit UnphysicalStateError(const std::string& msg) : std::runtime_error(msg) {}
};

// Finite-size parameter estimation produced no usable worst-case channel
// (a confidence bound crossed zero; too few estimation samples).
class EstimationFailureError : public std::runtime_error {
  public:
    explicit EstimationFailureError(const std::string& msg) : std::runtime_error(msg) {}
};

// The key rate is non-positive already at zero distance, so no maximum
// transmission distance exists for the requested scenario.
class NoKeyError : public std::runtime_error {
  public:
    explicit NoKeyError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace cvmdi
