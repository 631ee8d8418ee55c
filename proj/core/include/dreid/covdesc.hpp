#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "dreid/geometry.hpp"
#include "dreid/types.hpp"

namespace dreid {

enum class CovKind { kWithin, kBetween };

struct CovMatrix6 {
  Mat6 m = Mat6::Zero();
  CovKind kind = CovKind::kWithin;
  /// Set when the source voxel(s) held fewer than two points; `m` is then
  /// regularize(0).
  bool empty = false;
};

/// Depth voxel covariance descriptor: within-voxel matrices over the
/// overlapped grid (row-major), then between-voxel matrices over 8-adjacent
/// pairs of the plain grid (lexicographic pair order).
struct DVCovDescriptor {
  std::vector<CovMatrix6> within;
  std::vector<CovMatrix6> between;

  std::size_t size() const { return within.size() + between.size(); }
  const CovMatrix6& operator[](std::size_t i) const {
    return i < within.size() ? within[i] : between[i - within.size()];
  }
};

/// Concatenated per-matrix log-eigenvalue blocks, each descending.
struct EigenDepthFeature {
  Eigen::VectorXd x;
};

struct DescriptorParams {
  int rows = 6;
  int cols = 2;
  double eps_rel = 1e-6;
};

inline constexpr double kRegularizeFloor = 1e-9;

/// Unbiased sample covariance (divides by m - 1). Requires m >= 2.
CovMatrix6 within_voxel_covariance(std::span<const Vec6> features);

/// (1/mn) sum_ij (f_i - g_j)(f_i - g_j)^T evaluated in O(m + n).
CovMatrix6 between_voxel_covariance(std::span<const Vec6> p_features,
                                    std::span<const Vec6> q_features);

/// C + eps I with eps = eps_rel * max(trace(C) / 6, kRegularizeFloor).
CovMatrix6 regularize(const CovMatrix6& c, double eps_rel);

/// [ln l1 ... ln l6], l1 >= ... >= l6. Throws kNotPositiveDefinite.
Vec6 eigen_depth(const Mat6& c);

/// Eigenvalues in descending order, eigenvector columns to match. Ties keep
/// the solver's order.
struct SortedEigen6 {
  Vec6 values;
  Mat6 vectors;
};
SortedEigen6 sorted_eigen(const Mat6& c);

DVCovDescriptor extract_dvcov(const PointCloud& cloud, const SkeletonJoints& joints,
                              const DescriptorParams& params = {});

/// Same pipeline on a cloud that is already segmented.
DVCovDescriptor extract_dvcov_segmented(const PointCloud& segment,
                                        const DescriptorParams& params = {});

EigenDepthFeature extract_ed(const DVCovDescriptor& d);

/// 6 * ((2r-1)(2c-1) + |8-adjacent pairs|); 354 for the default 6x2 grid.
std::size_t ed_length(int rows, int cols);

}  // namespace dreid
