#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "dreid/types.hpp"

namespace dreid {

struct Intrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
};

/// Row-major depth map in millimetres; 0 marks an invalid pixel.
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<double> depth;
  Intrinsics intrinsics;

  double at(int u, int v) const { return depth[static_cast<std::size_t>(v) * width + u]; }
};

/// Points in camera coordinates (mm, y up, sensor at the origin). `normals`
/// is either empty or parallel to `points`.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_normals() const { return !normals.empty() && normals.size() == points.size(); }
};

/// [x, y, z, nx, ny, nz] for point i of a cloud with normals.
inline Vec6 feature_vector(const PointCloud& cloud, std::size_t i) {
  Vec6 f;
  f << cloud.points[i], cloud.normals[i];
  return f;
}

enum class Joint : std::size_t {
  kHead,
  kNeck,
  kLeftShoulder,
  kRightShoulder,
  kLeftElbow,
  kRightElbow,
  kLeftHand,
  kRightHand,
  kTorso,
  kLeftHip,
  kRightHip,
  kLeftKnee,
  kRightKnee,
  kLeftFoot,   // optional
  kRightFoot,  // optional
};

inline constexpr std::size_t kJointCount = 15;
inline constexpr std::size_t kRequiredJointCount = 13;

/// snake_case name used in skeleton JSON files.
std::string_view joint_name(Joint j);
std::optional<Joint> joint_from_name(std::string_view name);
bool is_required(Joint j);

class SkeletonJoints {
 public:
  void set(Joint j, const Vec3& p) { joints_[static_cast<std::size_t>(j)] = p; }
  bool has(Joint j) const { return joints_[static_cast<std::size_t>(j)].has_value(); }
  /// Throws kMissingJoint when absent.
  const Vec3& at(Joint j) const;

  /// Throws kMissingJoint if a required joint is absent and kInvalidArgument
  /// if any coordinate is non-finite.
  void validate() const;

  SkeletonJoints translated(const Vec3& offset) const;
  SkeletonJoints transformed(const Mat3& rotation, const Vec3& shift) const;

 private:
  std::array<std::optional<Vec3>, kJointCount> joints_;
};

struct BoundingBox2 {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;
};

/// Partition of the (x, y) body plane. Cells are stored row-major with row 0
/// at the bottom (smallest y) and column 0 at the smallest x.
struct VoxelGrid {
  int rows = 0;
  int cols = 0;
  bool overlapped = false;
  BoundingBox2 box;
  std::vector<std::vector<std::size_t>> cells;

  int lattice_rows() const { return overlapped ? 2 * rows - 1 : rows; }
  int lattice_cols() const { return overlapped ? 2 * cols - 1 : cols; }
  std::size_t cell_count() const { return cells.size(); }
};

/// p -> R1 (p + shift), n -> R2 n.
struct RigidMotion {
  Mat3 r1 = Mat3::Identity();
  Mat3 r2 = Mat3::Identity();
  Vec3 shift = Vec3::Zero();

  static RigidMotion identity() { return {}; }
  RigidMotion inverse() const;
  /// Both rotations orthonormal with det +1 within `tol`.
  bool is_valid(double tol = 1e-10) const;
  /// Block-diagonal 6x6 acting on feature vectors.
  Mat6 feature_rotation() const;
};

inline constexpr int kDefaultNormalNeighbors = 10;

PointCloud depth_to_pointcloud(const DepthImage& img);

/// PCA normals over each point plus its k nearest neighbours, oriented toward
/// the sensor at the origin. Requires k >= 2 and at least k + 1 points.
PointCloud estimate_normals(const PointCloud& cloud, int k = kDefaultNormalNeighbors);

/// Keeps head and torso: points above the lower hip joint, and below the neck
/// only those laterally inside the shoulder span widened by 5% on each side.
PointCloud segment_torso_head(const PointCloud& cloud, const SkeletonJoints& joints);

VoxelGrid build_voxel_grid(const PointCloud& cloud, int rows, int cols, bool overlapped);

/// Unordered 8-adjacent cell pairs (a < b) in lexicographic order.
std::vector<std::pair<std::size_t, std::size_t>> adjacent_voxel_pairs(const VoxelGrid& grid);
std::vector<std::pair<std::size_t, std::size_t>> adjacent_cell_pairs(int rows, int cols);

PointCloud apply_rigid_motion(const PointCloud& cloud, const RigidMotion& motion);

}  // namespace dreid
