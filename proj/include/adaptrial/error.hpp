#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace adaptrial {

enum class ErrorCode {
  NonConvergence,
  CompleteSeparation,
  RankDeficient,
  MissingColumn,
  InvalidArgument,
  InconsistentIndicators,
  EmptyCohort1,
  ZeroVariance,
  InvalidFraction,
  NonPositiveVariance,
  NonPositiveTheta,
  BadConfig,
  TriggerUnreachable,
  SchemaViolation,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Estimation-level failures (as opposed to bad input) map to exit code 3.
bool is_estimation_error(ErrorCode code);

}  // namespace adaptrial
