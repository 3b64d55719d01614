#include "solartb/error.hpp"

namespace solartb {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DomainTooNarrow: return "DomainTooNarrow";
    case ErrorKind::EmptyOrNonPositive: return "EmptyOrNonPositive";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::InvalidSpectrum: return "InvalidSpectrum";
    case ErrorKind::InvalidEndpoints: return "InvalidEndpoints";
    case ErrorKind::DutyOutOfRange: return "DutyOutOfRange";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::Unachievable: return "Unachievable";
    case ErrorKind::TargetOutOfRange: return "TargetOutOfRange";
    case ErrorKind::Config: return "Config";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace solartb
