#include "trusteq/error.hpp"

namespace trusteq {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kEmptyInstance: return "EmptyInstance";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kLabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kDegenerateDataset: return "DegenerateDataset";
    case ErrorCode::kBackendUnavailable: return "BackendUnavailable";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kHandshakeError: return "HandshakeError";
    case ErrorCode::kTimeout: return "Timeout";
    case ErrorCode::kProtocolViolation: return "ProtocolViolation";
    case ErrorCode::kPurityViolation: return "PurityViolation";
    case ErrorCode::kSingularSystem: return "SingularSystem";
    case ErrorCode::kTooManyFeatures: return "TooManyFeatures";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kMismatchedInstances: return "MismatchedInstances";
    case ErrorCode::kMismatchedCoverage: return "MismatchedCoverage";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfigError:
      return 2;
    case ErrorCode::kBackendUnavailable:
    case ErrorCode::kShapeMismatch:
    case ErrorCode::kHandshakeError:
    case ErrorCode::kTimeout:
    case ErrorCode::kProtocolViolation:
    case ErrorCode::kPurityViolation:
      return 3;
    case ErrorCode::kParseError:
    case ErrorCode::kLabelOutOfRange:
    case ErrorCode::kEmptyDataset:
    case ErrorCode::kEmptyInstance:
    case ErrorCode::kDegenerateDataset:
      return 4;
    default:
      return 1;
  }
}

}  // namespace trusteq
