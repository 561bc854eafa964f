#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cosmoqm {

/// Every failure the library can raise. The CLI maps each one onto an exit
/// category (see exit_category()).
enum class ErrorCode {
  // flrw-cosmology
  NonPositiveHubble,
  NegativeDensity,
  UnsupportedRecollapse,
  NegativeRadicand,
  StiffnessFailure,
  TimeOutOfRange,
  ClosedUniverseUnsupported,
  // quantum-core
  ZeroVector,
  DimensionTooSmall,
  ImpossibleOutcome,
  DimensionMismatch,
  // branch-ensemble
  EnumerationTooLarge,
  TableTooLarge,
  InvalidWeight,
  // frequency-operator
  OutcomeOutOfRange,
  // shared precondition failures
  InvalidArgument,
  // scenario-cli
  ConfigInvalid,
  ConfigUnreadable,
  OutputUnwritable,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonPositiveHubble: return "NonPositiveHubble";
    case ErrorCode::NegativeDensity: return "NegativeDensity";
    case ErrorCode::UnsupportedRecollapse: return "UnsupportedRecollapse";
    case ErrorCode::NegativeRadicand: return "NegativeRadicand";
    case ErrorCode::StiffnessFailure: return "StiffnessFailure";
    case ErrorCode::TimeOutOfRange: return "TimeOutOfRange";
    case ErrorCode::ClosedUniverseUnsupported: return "ClosedUniverseUnsupported";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorCode::ImpossibleOutcome: return "ImpossibleOutcome";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EnumerationTooLarge: return "EnumerationTooLarge";
    case ErrorCode::TableTooLarge: return "TableTooLarge";
    case ErrorCode::InvalidWeight: return "InvalidWeight";
    case ErrorCode::OutcomeOutOfRange: return "OutcomeOutOfRange";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::ConfigUnreadable: return "ConfigUnreadable";
    case ErrorCode::OutputUnwritable: return "OutputUnwritable";
  }
  return "Unknown";
}

/// Process exit status for each class of failure.
enum class ExitCategory : int { Success = 0, Config = 2, Numeric = 3, Io = 4 };

constexpr ExitCategory exit_category(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NegativeRadicand:
    case ErrorCode::StiffnessFailure:
    case ErrorCode::EnumerationTooLarge:
    case ErrorCode::TableTooLarge:
      return ExitCategory::Numeric;
    case ErrorCode::ConfigUnreadable:
    case ErrorCode::OutputUnwritable:
      return ExitCategory::Io;
    default:
      return ExitCategory::Config;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cosmoqm
