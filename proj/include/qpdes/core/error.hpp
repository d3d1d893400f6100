#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qpdes {

enum class ErrorCode {
  kSchedulingInPast,
  kUnknownEntity,
  kHandlerFailure,
  kTimeOverflow,
  kTransportFailure,
  kCausalityViolation,
  kModeInapplicable,
  kDuplicateKey,
  kNotAPermutation,
  kUnknownGate,
  kWireOutOfRange,
  kZeroNormResidual,
  kBadDimension,
  kNotNormalized,
  kUnknownKey,
  kServerUnavailable,
  kMissingState,
  kMalformedMessage,
  kBindFailure,
  kInvalidSize,
  kIndivisiblePartition,
  kParseError,
  kValidationError,
  kMismatchedConfig,
  kPrecondition,
  kInconsistentState,
};

std::string_view to_string(ErrorCode code) noexcept;
/// Inverse of to_string; kPrecondition for unrecognized names.
ErrorCode error_code_from(std::string_view name) noexcept;

/// Base exception for every failure raised by the simulator. The code lets
/// callers and tests distinguish failure classes without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace qpdes
