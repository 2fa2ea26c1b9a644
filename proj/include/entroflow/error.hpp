#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace entroflow {

enum class ErrorKind {
  InvalidInput,
  DegenerateMetric,
  OutOfDomain,
  PreconditionViolation,
  NumericalInconsistency,
  InvalidDensity,
  DegenerateEnergy,
  SingularityDetected,
  MassDrift,
  InsufficientDomain,
  DomainMonotonicityViolation,
  Usage,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for every module; callers dispatch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) throw Error(kind, what);
}

}  // namespace entroflow
