#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lecam {

enum class ErrorCode {
  DimensionMismatch,
  NotPSD,
  NotNormalized,
  NumericalTP,
  NotTracePreserving,
  NotCompletelyPositive,
  ParameterOutOfRange,
  IllConditioned,
  LabelMismatch,
  UnknownLabel,
  NegativeWeight,
  UnsupportedSpec,
  InvalidProblem,
  SolverFailure,
  ConfigError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable code; what() holds the human message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lecam
