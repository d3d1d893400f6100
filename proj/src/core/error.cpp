#include "qpdes/core/error.hpp"

namespace qpdes {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kSchedulingInPast: return "SchedulingInPast";
    case ErrorCode::kUnknownEntity: return "UnknownEntity";
    case ErrorCode::kHandlerFailure: return "HandlerFailure";
    case ErrorCode::kTimeOverflow: return "TimeOverflow";
    case ErrorCode::kTransportFailure: return "TransportFailure";
    case ErrorCode::kCausalityViolation: return "CausalityViolation";
    case ErrorCode::kModeInapplicable: return "ModeInapplicable";
    case ErrorCode::kDuplicateKey: return "DuplicateKey";
    case ErrorCode::kNotAPermutation: return "NotAPermutation";
    case ErrorCode::kUnknownGate: return "UnknownGate";
    case ErrorCode::kWireOutOfRange: return "WireOutOfRange";
    case ErrorCode::kZeroNormResidual: return "ZeroNormResidual";
    case ErrorCode::kBadDimension: return "BadDimension";
    case ErrorCode::kNotNormalized: return "NotNormalized";
    case ErrorCode::kUnknownKey: return "UnknownKey";
    case ErrorCode::kServerUnavailable: return "ServerUnavailable";
    case ErrorCode::kMissingState: return "MissingState";
    case ErrorCode::kMalformedMessage: return "MalformedMessage";
    case ErrorCode::kBindFailure: return "BindFailure";
    case ErrorCode::kInvalidSize: return "InvalidSize";
    case ErrorCode::kIndivisiblePartition: return "IndivisiblePartition";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kValidationError: return "ValidationError";
    case ErrorCode::kMismatchedConfig: return "MismatchedConfig";
    case ErrorCode::kPrecondition: return "Precondition";
    case ErrorCode::kInconsistentState: return "InconsistentState";
  }
  return "Unknown";
}

ErrorCode error_code_from(std::string_view name) noexcept {
  for (int i = 0; i <= static_cast<int>(ErrorCode::kInconsistentState); ++i) {
    const auto code = static_cast<ErrorCode>(i);
    if (to_string(code) == name) return code;
  }
  return ErrorCode::kPrecondition;
}

}  // namespace qpdes
