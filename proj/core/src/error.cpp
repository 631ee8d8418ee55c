#include "dreid/error.hpp"

namespace dreid {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kInvalidIntrinsics: return "invalid-intrinsics";
    case ErrorCode::kInsufficientPoints: return "insufficient-points";
    case ErrorCode::kDegenerateNeighborhood: return "degenerate-neighborhood";
    case ErrorCode::kEmptySegment: return "empty-segment";
    case ErrorCode::kDegenerateExtent: return "degenerate-extent";
    case ErrorCode::kWrongGridKind: return "wrong-grid-kind";
    case ErrorCode::kMissingNormals: return "missing-normals";
    case ErrorCode::kInvalidMatrix: return "invalid-matrix";
    case ErrorCode::kNotPositiveDefinite: return "not-positive-definite";
    case ErrorCode::kLayoutMismatch: return "layout-mismatch";
    case ErrorCode::kMissingJoint: return "missing-joint";
    case ErrorCode::kDegenerateSkeleton: return "degenerate-skeleton";
    case ErrorCode::kZeroVariance: return "zero-variance";
    case ErrorCode::kTooFewClasses: return "too-few-classes";
    case ErrorCode::kConditioning: return "conditioning";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kParse: return "parse";
  }
  return "unknown";
}

bool is_numerical(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kNotPositiveDefinite:
    case ErrorCode::kConditioning:
    case ErrorCode::kInvalidMatrix:
    case ErrorCode::kZeroVariance:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace dreid
