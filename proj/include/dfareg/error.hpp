#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dfareg {

enum class ErrorCode {
  invalid_input,
  non_finite,
  length_mismatch,
  invalid_grid,
  invalid_config,
  degenerate_regressor,
  degenerate_response,
  excessive_exclusions,
  io,
};

inline constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_input: return "invalid_input";
    case ErrorCode::non_finite: return "non_finite";
    case ErrorCode::length_mismatch: return "length_mismatch";
    case ErrorCode::invalid_grid: return "invalid_grid";
    case ErrorCode::invalid_config: return "invalid_config";
    case ErrorCode::degenerate_regressor: return "degenerate_regressor";
    case ErrorCode::degenerate_response: return "degenerate_response";
    case ErrorCode::excessive_exclusions: return "excessive_exclusions";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

/// Exception carrying a machine-readable code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dfareg
