#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace trusteq {

enum class ErrorCode {
  kInvalidArgument,
  kEmptyInstance,
  kParseError,
  kLabelOutOfRange,
  kEmptyDataset,
  kDegenerateDataset,
  kBackendUnavailable,
  kShapeMismatch,
  kHandshakeError,
  kTimeout,
  kProtocolViolation,
  kPurityViolation,
  kSingularSystem,
  kTooManyFeatures,
  kTooFewSamples,
  kMismatchedInstances,
  kMismatchedCoverage,
  kEmptyInput,
  kConfigError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Process exit status for an error: 2 config, 3 backend, 4 dataset, 1 otherwise.
int exit_code(ErrorCode code);

}  // namespace trusteq
