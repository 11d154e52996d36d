#include "pstruct/error.hpp"

namespace pstruct {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::BadParams: return "BadParams";
    case ErrorCode::DegeneratePoint: return "DegeneratePoint";
    case ErrorCode::TooCoarse: return "TooCoarse";
    case ErrorCode::EpsTooLarge: return "EpsTooLarge";
    case ErrorCode::BadEps: return "BadEps";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DegenerateConfig: return "DegenerateConfig";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::PathStalled: return "PathStalled";
    case ErrorCode::CoefficientBlowup: return "CoefficientBlowup";
    case ErrorCode::BadExponent: return "BadExponent";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::BadRange: return "BadRange";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
  }
  return "Unknown";
}

}  // namespace pstruct
