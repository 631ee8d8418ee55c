#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dreid {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kInvalidIntrinsics,
  kInsufficientPoints,
  kDegenerateNeighborhood,
  kEmptySegment,
  kDegenerateExtent,
  kWrongGridKind,
  kMissingNormals,
  kInvalidMatrix,
  kNotPositiveDefinite,
  kLayoutMismatch,
  kMissingJoint,
  kDegenerateSkeleton,
  kZeroVariance,
  kTooFewClasses,
  kConditioning,
  kIo,
  kParse,
};

std::string_view to_string(ErrorCode code) noexcept;

// Numerical failures are distinguished from bad data so the CLI can map them
// onto separate exit codes.
bool is_numerical(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dreid
