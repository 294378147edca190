#pragma once

#include <stdexcept>
#include <string>

namespace qmi {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input outside the mathematical domain of an operation (e.g. a matrix that
// should be PSD has a significantly negative eigenvalue).
struct DomainError : Error {
  using Error::Error;
};

// A quantity that must be invertible / strictly positive is not.
struct SingularityError : Error {
  using Error::Error;
};

// An iterative solver did not converge within its cap.
struct ConvergenceError : Error {
  using Error::Error;
};

// The precision escalation schedule was exhausted.
struct PrecisionError : Error {
  using Error::Error;
};

// Malformed configuration / input file.
struct ConfigError : Error {
  using Error::Error;
};

// A fit or analysis step rejected its input (sign changes, too few points, ...).
struct AnalysisError : Error {
  using Error::Error;
};

}  // namespace qmi
