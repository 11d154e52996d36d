#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pstruct {

enum class ErrorCode {
  BadParams,
  DegeneratePoint,
  TooCoarse,
  EpsTooLarge,
  BadEps,
  UnknownId,
  NoConvergence,
  DegenerateConfig,
  IllConditioned,
  PathStalled,
  CoefficientBlowup,
  BadExponent,
  NotConverged,
  BadRange,
  ConfigError,
  IoError,
  ShapeMismatch,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pstruct
