#include "dreid/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "dreid/error.hpp"
#include "kdtree.hpp"

namespace dreid {

namespace {

constexpr std::array<std::string_view, kJointCount> kJointNames = {
    "head",       "neck",        "left_shoulder", "right_shoulder", "left_elbow",
    "right_elbow", "left_hand",  "right_hand",    "torso",          "left_hip",
    "right_hip",  "left_knee",   "right_knee",    "left_foot",      "right_foot",
};

// Index of the cell holding `v` along one axis, half-open with the last cell
// closed. Computed as a scaled offset so boundary values land on the larger
// index whenever the division is exact.
int axis_cell(double v, double lo, double hi, int n) {
  const double t = (v - lo) * n / (hi - lo);
  const int idx = static_cast<int>(std::floor(t));
  return std::clamp(idx, 0, n - 1);
}

}  // namespace

std::string_view joint_name(Joint j) { return kJointNames[static_cast<std::size_t>(j)]; }

std::optional<Joint> joint_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kJointCount; ++i) {
    if (kJointNames[i] == name) return static_cast<Joint>(i);
  }
  return std::nullopt;
}

bool is_required(Joint j) { return static_cast<std::size_t>(j) < kRequiredJointCount; }

const Vec3& SkeletonJoints::at(Joint j) const {
  const auto& p = joints_[static_cast<std::size_t>(j)];
  if (!p) throw Error(ErrorCode::kMissingJoint, std::string(joint_name(j)));
  return *p;
}

void SkeletonJoints::validate() const {
  for (std::size_t i = 0; i < kJointCount; ++i) {
    const auto j = static_cast<Joint>(i);
    if (!joints_[i]) {
      if (is_required(j)) throw Error(ErrorCode::kMissingJoint, std::string(joint_name(j)));
      continue;
    }
    if (!joints_[i]->allFinite()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "non-finite coordinate for joint " + std::string(joint_name(j)));
    }
  }
}

SkeletonJoints SkeletonJoints::translated(const Vec3& offset) const {
  SkeletonJoints out = *this;
  for (auto& p : out.joints_) {
    if (p) *p += offset;
  }
  return out;
}

SkeletonJoints SkeletonJoints::transformed(const Mat3& rotation, const Vec3& shift) const {
  SkeletonJoints out = *this;
  for (auto& p : out.joints_) {
    if (p) *p = rotation * (*p + shift);
  }
  return out;
}

RigidMotion RigidMotion::inverse() const {
  RigidMotion inv;
  inv.r1 = r1.transpose();
  inv.r2 = r2.transpose();
  inv.shift = -(r1 * shift);
  return inv;
}

bool RigidMotion::is_valid(double tol) const {
  auto ok = [tol](const Mat3& r) {
    return (r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
           std::abs(r.determinant() - 1.0) <= tol;
  };
  return ok(r1) && ok(r2) && shift.allFinite();
}

Mat6 RigidMotion::feature_rotation() const {
  Mat6 r = Mat6::Zero();
  r.topLeftCorner<3, 3>() = r1;
  r.bottomRightCorner<3, 3>() = r2;
  return r;
}

PointCloud depth_to_pointcloud(const DepthImage& img) {
  const Intrinsics& k = img.intrinsics;
  if (!(k.fx > 0.0) || !(k.fy > 0.0)) {
    throw Error(ErrorCode::kInvalidIntrinsics, "focal lengths must be positive");
  }
  if (img.width < 0 || img.height < 0 ||
      img.depth.size() != static_cast<std::size_t>(img.width) * img.height) {
    throw Error(ErrorCode::kDimensionMismatch, "depth array does not match width*height");
  }
  PointCloud cloud;
  for (int v = 0; v < img.height; ++v) {
    for (int u = 0; u < img.width; ++u) {
      const double z = img.at(u, v);
      if (!(z > 0.0)) continue;
      cloud.points.emplace_back((u - k.cx) * z / k.fx, (k.cy - v) * z / k.fy, z);
    }
  }
  return cloud;
}

PointCloud estimate_normals(const PointCloud& cloud, int k) {
  if (k < 2) throw Error(ErrorCode::kInvalidArgument, "k must be at least 2");
  const std::size_t n = cloud.size();
  if (n < static_cast<std::size_t>(k) + 1) {
    throw Error(ErrorCode::kInsufficientPoints,
                "need at least " + std::to_string(k + 1) + " points, got " + std::to_string(n));
  }

  detail::KdTree3 tree(cloud.points);
  PointCloud out;
  out.points = cloud.points;
  out.normals.resize(n);

  Eigen::SelfAdjointEigenSolver<Mat3> solver;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& p = cloud.points[i];
    const auto hood = tree.nearest(p, static_cast<std::size_t>(k) + 1);

    Vec3 mean = Vec3::Zero();
    for (std::size_t j : hood) mean += cloud.points[j];
    mean /= static_cast<double>(hood.size());
    Mat3 cov = Mat3::Zero();
    for (std::size_t j : hood) {
      const Vec3 d = cloud.points[j] - mean;
      cov.noalias() += d * d.transpose();
    }
    if (cov.trace() <= 1e-24 * (1.0 + p.squaredNorm())) {
      throw Error(ErrorCode::kDegenerateNeighborhood,
                  "all neighbours of point " + std::to_string(i) + " coincide");
    }

    solver.compute(cov);
    Vec3 normal = solver.eigenvectors().col(0).normalized();
    if (normal.dot(p) > 0.0) normal = -normal;
    out.normals[i] = normal;
  }
  return out;
}

PointCloud segment_torso_head(const PointCloud& cloud, const SkeletonJoints& joints) {
  joints.validate();
  if (cloud.empty()) throw Error(ErrorCode::kEmptySegment, "input cloud is empty");

  const Vec3& ls = joints.at(Joint::kLeftShoulder);
  const Vec3& rs = joints.at(Joint::kRightShoulder);
  const double hip_y = std::min(joints.at(Joint::kLeftHip).y(), joints.at(Joint::kRightHip).y());
  const double neck_y = joints.at(Joint::kNeck).y();
  const double span_lo = std::min(ls.x(), rs.x());
  const double span_hi = std::max(ls.x(), rs.x());
  const double margin = 0.05 * (span_hi - span_lo);
  const double x_lo = span_lo - margin;
  const double x_hi = span_hi + margin;

  PointCloud out;
  const bool normals = cloud.has_normals();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    if (p.y() < hip_y) continue;
    if (p.y() < neck_y && (p.x() < x_lo || p.x() > x_hi)) continue;
    out.points.push_back(p);
    if (normals) out.normals.push_back(cloud.normals[i]);
  }
  if (out.empty()) throw Error(ErrorCode::kEmptySegment, "no head or torso points survive");
  return out;
}

VoxelGrid build_voxel_grid(const PointCloud& cloud, int rows, int cols, bool overlapped) {
  if (rows < 1 || cols < 1) throw Error(ErrorCode::kInvalidArgument, "grid needs rows, cols >= 1");
  if (cloud.empty()) throw Error(ErrorCode::kInsufficientPoints, "cannot grid an empty cloud");

  VoxelGrid grid;
  grid.rows = rows;
  grid.cols = cols;
  grid.overlapped = overlapped;
  BoundingBox2& box = grid.box;
  box.x_min = box.x_max = cloud.points.front().x();
  box.y_min = box.y_max = cloud.points.front().y();
  for (const Vec3& p : cloud.points) {
    box.x_min = std::min(box.x_min, p.x());
    box.x_max = std::max(box.x_max, p.x());
    box.y_min = std::min(box.y_min, p.y());
    box.y_max = std::max(box.y_max, p.y());
  }
  if (!(box.x_max > box.x_min) || !(box.y_max > box.y_min)) {
    throw Error(ErrorCode::kDegenerateExtent, "bounding box has zero width or height");
  }

  const int lr = grid.lattice_rows();
  const int lc = grid.lattice_cols();
  grid.cells.assign(static_cast<std::size_t>(lr) * lc, {});

  if (!overlapped) {
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const Vec3& p = cloud.points[i];
      const int r = axis_cell(p.y(), box.y_min, box.y_max, rows);
      const int c = axis_cell(p.x(), box.x_min, box.x_max, cols);
      grid.cells[static_cast<std::size_t>(r) * cols + c].push_back(i);
    }
    return grid;
  }

  // Overlapped cells are full-size cells stepped by half a cell, so along each
  // axis a point lies in the half-step slot s and in cells s-1 and s (when
  // they exist).
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    const int sr = axis_cell(p.y(), box.y_min, box.y_max, 2 * rows);
    const int sc = axis_cell(p.x(), box.x_min, box.x_max, 2 * cols);
    for (int r = sr - 1; r <= sr; ++r) {
      if (r < 0 || r >= lr) continue;
      for (int c = sc - 1; c <= sc; ++c) {
        if (c < 0 || c >= lc) continue;
        grid.cells[static_cast<std::size_t>(r) * lc + c].push_back(i);
      }
    }
  }
  return grid;
}

std::vector<std::pair<std::size_t, std::size_t>> adjacent_cell_pairs(int rows, int cols) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  auto id = [cols](int r, int c) { return static_cast<std::size_t>(r) * cols + c; };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int r2 = r + dr;
          const int c2 = c + dc;
          if ((dr == 0 && dc == 0) || r2 < 0 || r2 >= rows || c2 < 0 || c2 >= cols) continue;
          if (id(r2, c2) > id(r, c)) pairs.emplace_back(id(r, c), id(r2, c2));
        }
      }
    }
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

std::vector<std::pair<std::size_t, std::size_t>> adjacent_voxel_pairs(const VoxelGrid& grid) {
  if (grid.overlapped) {
    throw Error(ErrorCode::kWrongGridKind, "adjacency is defined on the non-overlapped grid");
  }
  return adjacent_cell_pairs(grid.rows, grid.cols);
}

PointCloud apply_rigid_motion(const PointCloud& cloud, const RigidMotion& motion) {
  if (!cloud.has_normals()) throw Error(ErrorCode::kMissingNormals, "rigid motion acts on normals too");
  PointCloud out;
  out.points.reserve(cloud.size());
  out.normals.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    out.points.push_back(motion.r1 * (cloud.points[i] + motion.shift));
    out.normals.push_back(motion.r2 * cloud.normals[i]);
  }
  return out;
}

}  // namespace dreid
