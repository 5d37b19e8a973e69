#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stockvolve {

enum class ErrorCode {
  InvalidParameters,
  StepTooLarge,
  NoStationaryState,
  NotConverged,
  DegenerateCurves,
  NoIntersection,
  InsufficientData,
  FitFailed,
  TooFewObservations,
  TooFewDistinctReturns,
  QuadratureFailure,
  NonPositivePrice,
  NonPositiveValue,
  NoOverlap,
  TooShort,
  InvalidPenalty,
  EmptySeries,
  ParseError,
  IoError,
  ConfigError,
};

constexpr std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParameters: return "InvalidParameters";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::NoStationaryState: return "NoStationaryState";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::DegenerateCurves: return "DegenerateCurves";
    case ErrorCode::NoIntersection: return "NoIntersection";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::FitFailed: return "FitFailed";
    case ErrorCode::TooFewObservations: return "TooFewObservations";
    case ErrorCode::TooFewDistinctReturns: return "TooFewDistinctReturns";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::NonPositivePrice: return "NonPositivePrice";
    case ErrorCode::NonPositiveValue: return "NonPositiveValue";
    case ErrorCode::NoOverlap: return "NoOverlap";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::InvalidPenalty: return "InvalidPenalty";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

// Input/configuration failures as opposed to model-domain failures. The CLI
// maps the former to exit code 1 and the latter to exit code 2.
constexpr bool is_io_error(ErrorCode code) {
  return code == ErrorCode::ParseError || code == ErrorCode::IoError ||
         code == ErrorCode::ConfigError || code == ErrorCode::EmptySeries;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace stockvolve
