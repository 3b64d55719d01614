#pragma once

#include <stdexcept>
#include <string>

namespace solartb {

enum class ErrorKind {
  DomainTooNarrow,
  EmptyOrNonPositive,
  TooFewSamples,
  InvalidSpectrum,
  InvalidEndpoints,
  DutyOutOfRange,
  OutOfRange,
  Unachievable,
  TargetOutOfRange,
  Config,
  Io,
};

const char* to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` tells callers which
/// contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace solartb
