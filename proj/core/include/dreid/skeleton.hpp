#pragma once

#include <Eigen/Core>

#include "dreid/geometry.hpp"

namespace dreid {

inline constexpr int kSkeletonFeatureSize = 13;

/// Thirteen physique measurements (cm, ratios dimensionless), in order:
///  0 head height            7 right upper leg
///  1 neck height            8 left upper leg
///  2 neck-left shoulder     9 torso length (neck-torso)
///  3 neck-right shoulder   10 hip-to-hip
///  4 torso-right shoulder  11 torso / right upper leg
///  5 right arm             12 torso / left upper leg
///  6 left arm
struct SkeletonFeature {
  Eigen::Matrix<double, kSkeletonFeatureSize, 1> v =
      Eigen::Matrix<double, kSkeletonFeatureSize, 1>::Zero();
};

/// Knee-to-floor allowance used when no foot joints are tracked.
inline constexpr double kMedianLowerLegMm = 500.0;

/// Height of the floor plane: the lowest tracked foot, otherwise the lowest
/// knee minus kMedianLowerLegMm.
double floor_height(const SkeletonJoints& joints);

/// Throws kMissingJoint or kDegenerateSkeleton (zero upper-leg length).
SkeletonFeature skeleton_feature(const SkeletonJoints& joints);

double skl_distance(const SkeletonFeature& a, const SkeletonFeature& b);

}  // namespace dreid
