#pragma once

#include <stdexcept>
#include <string>

namespace reachguard {

enum class ErrorCode {
  kDimensionMismatch,
  kInvalidArgument,
  kNonFinite,
  kDomainExit,
  kStepUnderflow,
  kDivisionByZero,
  kUnboundedInterval,
  kDeltaCap,
  kRefinementLimit,
  kUnknownModel,
  kValidation,
  kParse,
  kConfig,
  kIo,
};

const char* to_string(ErrorCode code);

/// Single exception type for the library; `code()` lets callers branch on the
/// failure class (verify refines on kDomainExit / kDeltaCap / kUnboundedInterval).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace reachguard
