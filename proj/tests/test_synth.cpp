#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "dreid/covdesc.hpp"
#include "dreid/geometry.hpp"
#include "dreid/spd.hpp"
#include "dreid/synth.hpp"
#include "test_support.hpp"

namespace {

using dreid::BodyPart;
using dreid::Vec3;

double degrees(double radians) { return radians * 180.0 / std::numbers::pi; }

TEST(GenerateBody, SameSeedSameBody) {
  dreid::SyntheticBodySpec spec;
  spec.noise_sigma = 2.0;
  const auto a = dreid::generate_body(spec, 12, {0.3, Vec3(10, -150, 2600)});
  const auto b = dreid::generate_body(spec, 12, {0.3, Vec3(10, -150, 2600)});
  EXPECT_EQ(a.cloud.points, b.cloud.points);
  EXPECT_EQ(a.labels, b.labels);
  for (std::size_t j = 0; j < dreid::kJointCount; ++j) {
    const auto joint = static_cast<dreid::Joint>(j);
    ASSERT_EQ(a.joints.has(joint), b.joints.has(joint));
    if (a.joints.has(joint)) EXPECT_EQ(a.joints.at(joint), b.joints.at(joint));
  }
  const auto c = dreid::generate_body(spec, 13, {0.3, Vec3(10, -150, 2600)});
  EXPECT_NE(a.cloud.points, c.cloud.points);
}

TEST(GenerateBody, NoiselessHeadLiesOnTheSphere) {
  dreid::SyntheticBodySpec spec;
  const auto body = dreid::generate_body(spec, 4, {0.5, Vec3(0, -200, 2500)});
  std::size_t head = 0;
  for (std::size_t i = 0; i < body.cloud.size(); ++i) {
    if (body.labels[i] != BodyPart::kHead) continue;
    ++head;
    EXPECT_LE(std::abs((body.cloud.points[i] - body.head_center).norm() - spec.head_radius), 1e-9);
  }
  EXPECT_GT(head, 100u);
}

TEST(GenerateBody, OnlySensorFacingSurfaceIsSampled) {
  const auto body = dreid::generate_body({}, 4);
  for (std::size_t i = 0; i < body.cloud.size(); ++i) {
    if (body.labels[i] != BodyPart::kHead) continue;
    const Vec3 outward = body.cloud.points[i] - body.head_center;
    EXPECT_GT(outward.dot(-body.cloud.points[i]), 0.0);
  }
}

TEST(GenerateBody, LabelsPartitionPoints) {
  const auto body = dreid::generate_body({}, 8);
  ASSERT_EQ(body.labels.size(), body.cloud.size());
  std::map<BodyPart, std::size_t> counts;
  for (BodyPart p : body.labels) ++counts[p];
  EXPECT_EQ(counts.size(), 6u);
  std::size_t total = 0;
  for (const auto& [part, n] : counts) total += n;
  EXPECT_EQ(total, body.cloud.size());
}

TEST(GenerateBody, BodyScaleAndSkeleton) {
  const auto body = dreid::generate_body({}, 1);
  body.joints.validate();
  double y_min = 1e300;
  double y_max = -1e300;
  for (const Vec3& p : body.cloud.points) {
    y_min = std::min(y_min, p.y());
    y_max = std::max(y_max, p.y());
    EXPECT_GT(p.z(), 2000.0);
    EXPECT_LT(p.z(), 3000.0);
  }
  EXPECT_GT(y_max - y_min, 1500.0);
  EXPECT_LT(y_max - y_min, 2000.0);
}

TEST(GenerateBody, InvalidSpecRejected) {
  dreid::SyntheticBodySpec spec;
  spec.head_radius = 0.0;
  EXPECT_DREID_ERROR(dreid::generate_body(spec, 1), dreid::ErrorCode::kInvalidArgument);
  spec = {};
  spec.noise_sigma = -1.0;
  EXPECT_DREID_ERROR(dreid::generate_body(spec, 1), dreid::ErrorCode::kInvalidArgument);
}

// kNN normals carry a bias of roughly (neighbourhood radius) / (curvature
// radius), so the check runs on a dense head. On the silhouette the analytic
// normal is perpendicular to the view ray and "toward the sensor" picks an
// arbitrary sign; there only the normal line is compared.
TEST(GenerateBody, HeadNormalsWithinTwoDegrees) {
  dreid::SyntheticBodySpec spec;
  spec.density = 0.5;
  const auto body = dreid::generate_body(spec, 0);
  const auto cloud = dreid::estimate_normals(body.cloud, 10);
  const double rim = std::sin(2.0 * std::numbers::pi / 180.0);
  double worst_line = 0.0;
  double worst_oriented = 0.0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (body.labels[i] != BodyPart::kHead) continue;
    const Vec3 e = (cloud.points[i] - body.head_center).normalized();
    const Vec3& n = cloud.normals[i];
    worst_line = std::max(worst_line, degrees(std::acos(std::min(1.0, std::abs(n.dot(e))))));
    const Vec3 ray = cloud.points[i].normalized();
    if (std::abs(e.dot(ray)) <= rim) continue;
    const Vec3 toward = e.dot(-ray) >= 0.0 ? e : Vec3(-e);
    worst_oriented = std::max(worst_oriented, degrees(std::acos(std::min(1.0, n.dot(toward)))));
  }
  EXPECT_LE(worst_line, 2.0);
  EXPECT_LE(worst_oriented, 2.0);
}

TEST(GenerateBody, DistinctSpecsSeparateUnderDvcov) {
  dreid::SyntheticBodySpec a;
  a.noise_sigma = 2.0;
  dreid::SyntheticBodySpec b = a;
  b.torso_a = 230.0;
  b.torso_b = 340.0;
  auto descriptor = [](const dreid::SyntheticBodySpec& spec, std::uint64_t seed) {
    const auto body = dreid::generate_body(spec, seed);
    return dreid::extract_dvcov(dreid::estimate_normals(body.cloud), body.joints);
  };
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a1 = descriptor(a, seed);
    const auto a2 = descriptor(a, seed + 1000);
    const auto b1 = descriptor(b, seed);
    EXPECT_GT(dreid::dvcov_distance(a1, b1).value, dreid::dvcov_distance(a1, a2).value) << "seed " << seed;
  }
}

TEST(RandomHelpers, RotationsAndMotionsAreValid) {
  auto rng = dreid::make_engine(6);
  for (int t = 0; t < 50; ++t) {
    const dreid::Mat3 r = dreid::random_rotation(rng);
    EXPECT_LE((r * r.transpose() - dreid::Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
    const auto m = dreid::random_rigid_motion(rng, 50.0);
    EXPECT_TRUE(m.is_valid());
    EXPECT_LE(m.shift.cwiseAbs().maxCoeff(), 50.0);
  }
  const dreid::Mat3 y = dreid::yaw_rotation(std::numbers::pi / 2.0);
  EXPECT_LE((y * Vec3(1, 0, 0) - Vec3(0, 0, -1)).norm(), 1e-15);
  EXPECT_LE((y * Vec3(0, 1, 0) - Vec3(0, 1, 0)).norm(), 1e-15);
}

TEST(RandomHelpers, BodySpecSpread) {
  auto rng = dreid::make_engine(7);
  const dreid::SyntheticBodySpec base;
  for (int t = 0; t < 20; ++t) {
    const auto s = dreid::random_body_spec(rng, 0.15);
    s.validate();
    EXPECT_GE(s.torso_a, 0.85 * base.torso_a);
    EXPECT_LE(s.torso_a, 1.15 * base.torso_a);
    EXPECT_GE(s.leg_length, 0.85 * base.leg_length);
    EXPECT_LE(s.leg_length, 1.15 * base.leg_length);
  }
}

TEST(PairedFeatures, ShapesAndDeterminism) {
  const auto a = dreid::generate_paired_features(5, 4, 11);
  const auto b = dreid::generate_paired_features(5, 4, 11);
  ASSERT_EQ(a.size(), 20);
  EXPECT_EQ(a.visual.cols(), 32);
  EXPECT_EQ(a.depth.cols(), 24);
  EXPECT_EQ(a.visual, b.visual);
  EXPECT_EQ(a.depth, b.depth);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(std::set<int>(a.labels.begin(), a.labels.end()).size(), 5u);
  EXPECT_NE(a.visual, dreid::generate_paired_features(5, 4, 12).visual);
}

TEST(PairedFeatures, ZeroNoiseDepthIdenticalWithinPerson) {
  dreid::PairedFeatureParams params;
  params.noise = 0.0;
  const auto aux = dreid::generate_paired_features(4, 6, 3, params);
  for (Eigen::Index i = 0; i < aux.size(); ++i) {
    for (Eigen::Index j = 0; j < aux.size(); ++j) {
      if (aux.labels[static_cast<std::size_t>(i)] == aux.labels[static_cast<std::size_t>(j)]) {
        EXPECT_EQ(aux.depth.row(i), aux.depth.row(j));
      }
    }
  }
}

TEST(PairedFeatures, NearestClassMeanOnDepthIsAccurate) {
  const auto aux = dreid::generate_paired_features(20, 8, 21);
  std::map<int, Eigen::VectorXd> means;
  std::map<int, int> counts;
  for (Eigen::Index i = 0; i < aux.size(); ++i) {
    const int l = aux.labels[static_cast<std::size_t>(i)];
    if (!means.contains(l)) means[l] = Eigen::VectorXd::Zero(aux.depth.cols());
    means[l] += aux.depth.row(i).transpose();
    ++counts[l];
  }
  for (auto& [l, m] : means) m /= counts[l];
  int correct = 0;
  for (Eigen::Index i = 0; i < aux.size(); ++i) {
    int best = -1;
    double best_d = 1e300;
    for (const auto& [l, m] : means) {
      const double d = (aux.depth.row(i).transpose() - m).norm();
      if (d < best_d) {
        best_d = d;
        best = l;
      }
    }
    correct += best == aux.labels[static_cast<std::size_t>(i)];
  }
  EXPECT_GE(correct / static_cast<double>(aux.size()), 0.95);
}

TEST(CorruptionBenchmark, Construction) {
  const auto b = dreid::make_corruption_benchmark(3, 6, 4, 10, 0.2);
  EXPECT_EQ(b.aux.size(), 24);
  EXPECT_EQ(b.gallery_visual.rows(), 10);
  EXPECT_EQ(b.rgb_distances.rows(), b.probe_visual.rows());
  EXPECT_EQ(b.rgb_distances.cols(), b.gallery_visual.rows());
  EXPECT_EQ(static_cast<Eigen::Index>(b.probe_ids.size()), b.probe_visual.rows());
  EXPECT_EQ(b.corrupted_rows.size(), static_cast<std::size_t>(std::lround(0.2 * b.probe_visual.rows())));
  for (Eigen::Index i = 0; i < b.rgb_distances.rows(); ++i) {
    const bool corrupted =
        std::find(b.corrupted_rows.begin(), b.corrupted_rows.end(), static_cast<int>(i)) != b.corrupted_rows.end();
    if (corrupted) continue;
    for (Eigen::Index j = 0; j < b.rgb_distances.cols(); ++j) {
      EXPECT_NEAR(b.rgb_distances(i, j), (b.probe_visual.row(i) - b.gallery_visual.row(j)).norm(), 1e-12);
    }
  }
  const auto again = dreid::make_corruption_benchmark(3, 6, 4, 10, 0.2);
  EXPECT_EQ(again.rgb_distances, b.rgb_distances);
}

}  // namespace
