#include "halle/error.hpp"

namespace halle {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedBrackets: return "MalformedBrackets";
    case ErrorCode::kLlmUnavailable: return "LlmUnavailable";
    case ErrorCode::kUnparsableOutput: return "UnparsableOutput";
    case ErrorCode::kCacheMissInReplay: return "CacheMissInReplay";
    case ErrorCode::kEmptyDenominator: return "EmptyDenominator";
    case ErrorCode::kOracleMiss: return "OracleMiss";
    case ErrorCode::kAlreadyAnnotated: return "AlreadyAnnotated";
    case ErrorCode::kLeakedObject: return "LeakedObject";
    case ErrorCode::kPrecondition: return "PreconditionFailed";
    case ErrorCode::kDegenerateCorpus: return "DegenerateCorpus";
    case ErrorCode::kMissingLabelSide: return "MissingLabelSide";
    case ErrorCode::kEnumerationTooLarge: return "EnumerationTooLarge";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kInputParse: return "InputParse";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kUsage: return "Usage";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUsage:
    case ErrorCode::kPrecondition:
      return 2;
    case ErrorCode::kInputParse:
    case ErrorCode::kInvalidConfig:
    case ErrorCode::kSchemaMismatch:
    case ErrorCode::kMalformedBrackets:
    case ErrorCode::kAlreadyAnnotated:
    case ErrorCode::kOracleMiss:
    case ErrorCode::kDegenerateCorpus:
    case ErrorCode::kMissingLabelSide:
    case ErrorCode::kEmptyDenominator:
    case ErrorCode::kEnumerationTooLarge:
      return 3;
    case ErrorCode::kLlmUnavailable:
    case ErrorCode::kUnparsableOutput:
    case ErrorCode::kCacheMissInReplay:
      return 4;
    case ErrorCode::kLeakedObject:
    case ErrorCode::kInternal:
      return 5;
  }
  return 5;
}

}  // namespace halle
