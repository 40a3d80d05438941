#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace halle {

enum class ErrorCode {
  kMalformedBrackets,
  kLlmUnavailable,
  kUnparsableOutput,
  kCacheMissInReplay,
  kEmptyDenominator,
  kOracleMiss,
  kAlreadyAnnotated,
  kLeakedObject,
  kPrecondition,
  kDegenerateCorpus,
  kMissingLabelSide,
  kEnumerationTooLarge,
  kSchemaMismatch,
  kInputParse,
  kInvalidConfig,
  kUsage,
  kInternal,
};

std::string_view to_string(ErrorCode code);

// Process exit code for an error kind: 2 usage, 3 input, 4 upstream service,
// 5 internal invariant violation.
int exit_code_for(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace halle
