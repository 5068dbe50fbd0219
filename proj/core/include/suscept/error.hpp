#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace suscept {

enum class ErrorKind {
  InvalidArgument,
  StepLimitExceeded,
  NonFiniteState,
  NoCrossing,
  NoConvergence,
  SingularConstraint,
  ConvergenceFailure,
};

[[nodiscard]] constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::StepLimitExceeded: return "StepLimitExceeded";
    case ErrorKind::NonFiniteState: return "NonFiniteState";
    case ErrorKind::NoCrossing: return "NoCrossing";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::SingularConstraint: return "SingularConstraint";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a kind so callers (the scan
/// driver in particular) can record per-point failure reasons.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace suscept
