#include "adaptrial/error.hpp"

namespace adaptrial {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::CompleteSeparation: return "CompleteSeparation";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InconsistentIndicators: return "InconsistentIndicators";
    case ErrorCode::EmptyCohort1: return "EmptyCohort1";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::InvalidFraction: return "InvalidFraction";
    case ErrorCode::NonPositiveVariance: return "NonPositiveVariance";
    case ErrorCode::NonPositiveTheta: return "NonPositiveTheta";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::TriggerUnreachable: return "TriggerUnreachable";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
  }
  return "Unknown";
}

bool is_estimation_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonConvergence:
    case ErrorCode::CompleteSeparation:
    case ErrorCode::RankDeficient:
    case ErrorCode::EmptyCohort1:
    case ErrorCode::ZeroVariance:
    case ErrorCode::NonPositiveVariance:
    case ErrorCode::NonPositiveTheta:
    case ErrorCode::TriggerUnreachable:
    case ErrorCode::InvalidFraction:
      return true;
    default:
      return false;
  }
}

}  // namespace adaptrial
