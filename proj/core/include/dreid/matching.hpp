#pragma once

#include <span>

#include <Eigen/Core>

#include "dreid/covdesc.hpp"
#include "dreid/skeleton.hpp"
#include "dreid/subspace.hpp"

namespace dreid {

/// [ED within blocks, ED between blocks, skeleton] as one vector.
Eigen::VectorXd fuse_ed_skl(const EigenDepthFeature& ed, const SkeletonFeature& skl);

struct FusedParts {
  EigenDepthFeature ed;
  SkeletonFeature skl;
};
FusedParts split_ed_skl(const Eigen::VectorXd& combined);

/// Row i, column j: Euclidean distance between probe row i and gallery row j.
Eigen::MatrixXd pairwise_euclidean(const Eigen::MatrixXd& probe, const Eigen::MatrixXd& gallery);

/// Fits PCA + LDA on `train` and returns probe x gallery distances in the
/// learned space. Used for both ED and ED+SKL vectors.
Eigen::MatrixXd match_subspace(const LabeledFeatureSet& train, const LabeledFeatureSet& gallery,
                               const LabeledFeatureSet& probe, int p_max = kDefaultPcaDims);

inline Eigen::MatrixXd match_ed_skl(const LabeledFeatureSet& train, const LabeledFeatureSet& gallery,
                                    const LabeledFeatureSet& probe) {
  return match_subspace(train, gallery, probe);
}

struct DepthSample {
  DVCovDescriptor dvcov;
  SkeletonFeature skl;
};

Eigen::MatrixXd dvcov_distance_matrix(std::span<const DepthSample> gallery,
                                      std::span<const DepthSample> probe);
Eigen::MatrixXd skl_distance_matrix(std::span<const DepthSample> gallery,
                                    std::span<const DepthSample> probe);

enum class FusionScaling {
  kRaw,             // d_DVCov + d_SKL as is
  kMeanNormalized,  // each term divided by its mean over the matrix
};

/// probe x gallery matrix of d_DVCov + d_SKL. No training involved.
Eigen::MatrixXd match_dvcov_skl(std::span<const DepthSample> gallery, std::span<const DepthSample> probe,
                                FusionScaling scaling = FusionScaling::kRaw);

}  // namespace dreid
