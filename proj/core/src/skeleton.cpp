#include "dreid/skeleton.hpp"

#include <algorithm>
#include <limits>

#include "dreid/error.hpp"

namespace dreid {

namespace {

constexpr double kMmPerCm = 10.0;

}  // namespace

double floor_height(const SkeletonJoints& joints) {
  double lowest_foot = std::numeric_limits<double>::infinity();
  for (Joint foot : {Joint::kLeftFoot, Joint::kRightFoot}) {
    if (joints.has(foot)) lowest_foot = std::min(lowest_foot, joints.at(foot).y());
  }
  if (lowest_foot < std::numeric_limits<double>::infinity()) return lowest_foot;
  const double knee = std::min(joints.at(Joint::kLeftKnee).y(), joints.at(Joint::kRightKnee).y());
  return knee - kMedianLowerLegMm;
}

SkeletonFeature skeleton_feature(const SkeletonJoints& joints) {
  joints.validate();
  auto p = [&joints](Joint j) -> const Vec3& { return joints.at(j); };
  auto dist = [&p](Joint a, Joint b) { return (p(a) - p(b)).norm(); };

  const double floor_y = floor_height(joints);
  const double right_leg = dist(Joint::kRightHip, Joint::kRightKnee);
  const double left_leg = dist(Joint::kLeftHip, Joint::kLeftKnee);
  if (!(right_leg > 0.0) || !(left_leg > 0.0)) {
    throw Error(ErrorCode::kDegenerateSkeleton, "upper-leg length is zero");
  }
  const double torso = dist(Joint::kNeck, Joint::kTorso);

  SkeletonFeature f;
  f.v[0] = p(Joint::kHead).y() - floor_y;
  f.v[1] = p(Joint::kNeck).y() - floor_y;
  f.v[2] = dist(Joint::kNeck, Joint::kLeftShoulder);
  f.v[3] = dist(Joint::kNeck, Joint::kRightShoulder);
  f.v[4] = dist(Joint::kTorso, Joint::kRightShoulder);
  f.v[5] = dist(Joint::kRightShoulder, Joint::kRightElbow) + dist(Joint::kRightElbow, Joint::kRightHand);
  f.v[6] = dist(Joint::kLeftShoulder, Joint::kLeftElbow) + dist(Joint::kLeftElbow, Joint::kLeftHand);
  f.v[7] = right_leg;
  f.v[8] = left_leg;
  f.v[9] = torso;
  f.v[10] = dist(Joint::kRightHip, Joint::kLeftHip);
  f.v.head<11>() /= kMmPerCm;
  f.v[11] = f.v[9] / f.v[7];
  f.v[12] = f.v[9] / f.v[8];
  return f;
}

double skl_distance(const SkeletonFeature& a, const SkeletonFeature& b) { return (a.v - b.v).norm(); }

}  // namespace dreid
