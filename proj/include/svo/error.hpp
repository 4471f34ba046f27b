#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace svo {

enum class ErrorCode {
  kInvalidArgument,
  kPointBehindCamera,
  kNonPositiveDisparity,
  kDegenerateSample,
  kNonNormalizable,
  kInvalidQ,
  kNoValidModel,
  kInsufficientCorrespondences,
  kAllHypothesesDegenerate,
  kOptimizerDiverged,
  kNonFiniteCost,
  kFrustumEmpty,
  kMalformedInput,
  kNonMonotoneFrames,
  kMismatchedTrajectories,
  kInvalidConfig,
  kIo,
};

std::string_view ToString(ErrorCode code);

/// Exception carrying a machine-readable code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace svo
