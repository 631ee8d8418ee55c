#include "dreid/covdesc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "dreid/error.hpp"

namespace dreid {

namespace {

Mat6 symmetrized(const Mat6& m) { return 0.5 * (m + m.transpose()); }

std::vector<Vec6> gather(const PointCloud& cloud, const std::vector<std::size_t>& idx) {
  std::vector<Vec6> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(feature_vector(cloud, i));
  return out;
}

CovMatrix6 empty_matrix(CovKind kind, double eps_rel) {
  CovMatrix6 c;
  c.kind = kind;
  c = regularize(c, eps_rel);
  c.empty = true;
  return c;
}

}  // namespace

CovMatrix6 within_voxel_covariance(std::span<const Vec6> features) {
  const std::size_t m = features.size();
  if (m < 2) {
    throw Error(ErrorCode::kInsufficientPoints,
                "within-voxel covariance needs 2 points, got " + std::to_string(m));
  }
  // Accumulate about the first sample so millimetre-scale offsets do not
  // swamp the second moment.
  const Vec6 ref = features.front();
  Vec6 s1 = Vec6::Zero();
  Mat6 s2 = Mat6::Zero();
  for (const Vec6& f : features) {
    const Vec6 d = f - ref;
    s1 += d;
    s2.noalias() += d * d.transpose();
  }
  const double md = static_cast<double>(m);
  CovMatrix6 out;
  out.kind = CovKind::kWithin;
  out.m = symmetrized((s2 - s1 * s1.transpose() / md) / (md - 1.0));
  return out;
}

CovMatrix6 between_voxel_covariance(std::span<const Vec6> p_features,
                                    std::span<const Vec6> q_features) {
  if (p_features.empty() || q_features.empty()) {
    throw Error(ErrorCode::kInsufficientPoints, "between-voxel covariance needs both voxels non-empty");
  }
  const Vec6 ref = p_features.front();
  auto moments = [&ref](std::span<const Vec6> fs, Vec6& mean, Mat6& second) {
    mean.setZero();
    second.setZero();
    for (const Vec6& f : fs) {
      const Vec6 d = f - ref;
      mean += d;
      second.noalias() += d * d.transpose();
    }
    mean /= static_cast<double>(fs.size());
    second /= static_cast<double>(fs.size());
  };
  Vec6 mu_p, mu_q;
  Mat6 s_p, s_q;
  moments(p_features, mu_p, s_p);
  moments(q_features, mu_q, s_q);

  CovMatrix6 out;
  out.kind = CovKind::kBetween;
  out.m = symmetrized(s_p + s_q - mu_p * mu_q.transpose() - mu_q * mu_p.transpose());
  return out;
}

CovMatrix6 regularize(const CovMatrix6& c, double eps_rel) {
  if (!c.m.allFinite()) throw Error(ErrorCode::kInvalidMatrix, "covariance has non-finite entries");
  if (!(eps_rel >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "eps_rel must be non-negative");
  const double eps = eps_rel * std::max(c.m.trace() / 6.0, kRegularizeFloor);
  CovMatrix6 out = c;
  out.m = symmetrized(c.m);
  out.m.diagonal().array() += eps;
  return out;
}

SortedEigen6 sorted_eigen(const Mat6& c) {
  Eigen::SelfAdjointEigenSolver<Mat6> solver(c);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kInvalidMatrix, "symmetric eigensolver did not converge");
  }
  std::array<int, 6> order;
  std::iota(order.begin(), order.end(), 0);
  const Vec6& ev = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&ev](int a, int b) { return ev[a] > ev[b]; });
  SortedEigen6 out;
  for (int i = 0; i < 6; ++i) {
    out.values[i] = ev[order[i]];
    out.vectors.col(i) = solver.eigenvectors().col(order[i]);
  }
  return out;
}

Vec6 eigen_depth(const Mat6& c) {
  if (!c.allFinite()) throw Error(ErrorCode::kInvalidMatrix, "matrix has non-finite entries");
  Eigen::SelfAdjointEigenSolver<Mat6> solver(c, Eigen::EigenvaluesOnly);
  Vec6 ev = solver.eigenvalues().reverse();
  if (!(ev[5] > 0.0)) {
    throw Error(ErrorCode::kNotPositiveDefinite,
                "smallest eigenvalue " + std::to_string(ev[5]) + "; regularize first");
  }
  return ev.array().log().matrix();
}

DVCovDescriptor extract_dvcov_segmented(const PointCloud& segment, const DescriptorParams& params) {
  if (!segment.has_normals()) {
    throw Error(ErrorCode::kMissingNormals, "descriptor extraction needs per-point normals");
  }
  const VoxelGrid overlapped = build_voxel_grid(segment, params.rows, params.cols, true);
  const VoxelGrid plain = build_voxel_grid(segment, params.rows, params.cols, false);

  DVCovDescriptor d;
  d.within.reserve(overlapped.cell_count());
  for (const auto& cell : overlapped.cells) {
    if (cell.size() < 2) {
      d.within.push_back(empty_matrix(CovKind::kWithin, params.eps_rel));
      continue;
    }
    const auto fs = gather(segment, cell);
    d.within.push_back(regularize(within_voxel_covariance(fs), params.eps_rel));
  }

  const auto pairs = adjacent_voxel_pairs(plain);
  d.between.reserve(pairs.size());
  for (const auto& [a, b] : pairs) {
    const auto& ca = plain.cells[a];
    const auto& cb = plain.cells[b];
    if (ca.size() < 2 || cb.size() < 2) {
      d.between.push_back(empty_matrix(CovKind::kBetween, params.eps_rel));
      continue;
    }
    const auto fa = gather(segment, ca);
    const auto fb = gather(segment, cb);
    d.between.push_back(regularize(between_voxel_covariance(fa, fb), params.eps_rel));
  }
  return d;
}

DVCovDescriptor extract_dvcov(const PointCloud& cloud, const SkeletonJoints& joints,
                              const DescriptorParams& params) {
  if (!cloud.has_normals()) {
    throw Error(ErrorCode::kMissingNormals, "descriptor extraction needs per-point normals");
  }
  return extract_dvcov_segmented(segment_torso_head(cloud, joints), params);
}

EigenDepthFeature extract_ed(const DVCovDescriptor& d) {
  EigenDepthFeature out;
  out.x.resize(static_cast<Eigen::Index>(6 * d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) {
    out.x.segment<6>(static_cast<Eigen::Index>(6 * i)) = eigen_depth(d[i].m);
  }
  return out;
}

std::size_t ed_length(int rows, int cols) {
  const std::size_t within = static_cast<std::size_t>(2 * rows - 1) * (2 * cols - 1);
  return 6 * (within + adjacent_cell_pairs(rows, cols).size());
}

}  // namespace dreid
