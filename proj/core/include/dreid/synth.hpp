#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "dreid/geometry.hpp"
#include "dreid/rng.hpp"
#include "dreid/transfer.hpp"
#include "dreid/types.hpp"

namespace dreid {

enum class BodyPart : std::uint8_t { kTorso, kHead, kLeftArm, kRightArm, kLeftLeg, kRightLeg };

/// Parametric body made of an ellipsoid torso, a sphere head and cylinder
/// limbs. All lengths in mm.
struct SyntheticBodySpec {
  double torso_a = 180.0;  // half width (x)
  double torso_b = 300.0;  // half height (y)
  double torso_c = 110.0;  // half depth (z)
  double head_radius = 100.0;
  double arm_radius = 40.0;
  double arm_length = 600.0;
  double leg_radius = 60.0;
  double leg_length = 850.0;
  double density = 0.01;  // points per mm^2 of full surface
  double noise_sigma = 0.0;

  /// Throws kInvalidArgument unless every dimension and the density are
  /// positive and the noise is non-negative.
  void validate() const;
};

/// Placement of the body frame (origin between the hips, y up, facing -z)
/// in camera coordinates.
struct BodyPose {
  double yaw = 0.0;  // radians about the vertical axis
  Vec3 position{0.0, -200.0, 2500.0};
};

struct SyntheticBody {
  PointCloud cloud;  // no normals; run estimate_normals on it
  std::vector<BodyPart> labels;
  SkeletonJoints joints;
  Vec3 head_center = Vec3::Zero();  // noiseless, camera coordinates
};

/// Samples the sensor-facing surface of every primitive. Deterministic per
/// (spec, seed, pose).
SyntheticBody generate_body(const SyntheticBodySpec& spec, std::uint64_t seed, const BodyPose& pose = {});

/// Default spec with each dimension scaled independently by a factor drawn
/// from [1 - spread, 1 + spread].
SyntheticBodySpec random_body_spec(Engine& rng, double spread = 0.15);

/// Q^T diag(d) Q with log-uniform d in [dmin, dmax] and Haar-random Q.
Mat6 random_spd(Engine& rng, double dmin = 1e-2, double dmax = 1e2);

/// Haar-random rotation (det +1).
Mat3 random_rotation(Engine& rng);
Mat3 yaw_rotation(double radians);

/// Independent random rotations and a shift with entries in [-shift_scale, shift_scale].
RigidMotion random_rigid_motion(Engine& rng, double shift_scale = 100.0);

struct PairedFeatureParams {
  int latent_dim = 8;
  int visual_dim = 32;
  int depth_dim = 24;
  double view_sigma = 0.25;
  double noise = 0.05;
};

/// Per person a latent identity z; visual = tanh(W_v z) + view perturbation +
/// noise, depth = sin(W_d z) + noise. W_v and W_d are fixed across seeds so
/// independently generated sets share one embedding.
AuxiliaryDataset generate_paired_features(int persons, int views, std::uint64_t seed,
                                          const PairedFeatureParams& params = {});

/// RGB-only target set whose visual features come from the same embedding as
/// generate_paired_features, together with an RGB distance matrix in which a
/// fraction of probe rows is replaced by noise.
struct CorruptionBenchmark {
  AuxiliaryDataset aux;
  Eigen::MatrixXd gallery_visual;
  Eigen::MatrixXd probe_visual;
  std::vector<int> gallery_ids;
  std::vector<int> probe_ids;
  Eigen::MatrixXd rgb_distances;  // probe x gallery
  std::vector<int> corrupted_rows;
};

CorruptionBenchmark make_corruption_benchmark(std::uint64_t seed, int aux_persons = 20, int aux_views = 8,
                                              int target_persons = 20, double corrupt_fraction = 0.2,
                                              const PairedFeatureParams& params = {});

}  // namespace dreid
