#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tabalign {

enum class ErrorCode {
  NegativeWeight,
  ZeroMassRow,
  NotNormalized,
  RewardOutOfRange,
  InvalidRewardCap,
  DimensionMismatch,
  UnknownPrompt,
  UncoveredSupport,
  InvalidParameter,
  InfeasibleFixture,
  MissingPromptDistribution,
  Config,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries a code so callers (the CLI in
/// particular) can map it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tabalign
