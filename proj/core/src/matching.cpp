#include "dreid/matching.hpp"

#include "dreid/error.hpp"
#include "dreid/spd.hpp"

namespace dreid {

Eigen::VectorXd fuse_ed_skl(const EigenDepthFeature& ed, const SkeletonFeature& skl) {
  if (!ed.x.allFinite() || !skl.v.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "cannot fuse non-finite features");
  }
  Eigen::VectorXd out(ed.x.size() + kSkeletonFeatureSize);
  out << ed.x, skl.v;
  return out;
}

FusedParts split_ed_skl(const Eigen::VectorXd& combined) {
  const Eigen::Index ed_len = combined.size() - kSkeletonFeatureSize;
  if (ed_len < 0 || ed_len % 6 != 0) {
    throw Error(ErrorCode::kDimensionMismatch, "combined vector has no valid ED+SKL layout");
  }
  FusedParts parts;
  parts.ed.x = combined.head(ed_len);
  parts.skl.v = combined.tail<kSkeletonFeatureSize>();
  return parts;
}

Eigen::MatrixXd pairwise_euclidean(const Eigen::MatrixXd& probe, const Eigen::MatrixXd& gallery) {
  if (probe.cols() != gallery.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "probe and gallery dimensions differ");
  }
  Eigen::MatrixXd d(probe.rows(), gallery.rows());
  for (Eigen::Index i = 0; i < probe.rows(); ++i) {
    for (Eigen::Index j = 0; j < gallery.rows(); ++j) d(i, j) = (probe.row(i) - gallery.row(j)).norm();
  }
  return d;
}

Eigen::MatrixXd match_subspace(const LabeledFeatureSet& train, const LabeledFeatureSet& gallery,
                               const LabeledFeatureSet& probe, int p_max) {
  const SubspaceModel model = fit_subspace(train, p_max);
  return pairwise_euclidean(model.project(probe.features), model.project(gallery.features));
}

Eigen::MatrixXd dvcov_distance_matrix(std::span<const DepthSample> gallery,
                                      std::span<const DepthSample> probe) {
  Eigen::MatrixXd d(static_cast<Eigen::Index>(probe.size()), static_cast<Eigen::Index>(gallery.size()));
  for (std::size_t i = 0; i < probe.size(); ++i) {
    for (std::size_t j = 0; j < gallery.size(); ++j) {
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          dvcov_distance(probe[i].dvcov, gallery[j].dvcov).value;
    }
  }
  return d;
}

Eigen::MatrixXd skl_distance_matrix(std::span<const DepthSample> gallery,
                                    std::span<const DepthSample> probe) {
  Eigen::MatrixXd d(static_cast<Eigen::Index>(probe.size()), static_cast<Eigen::Index>(gallery.size()));
  for (std::size_t i = 0; i < probe.size(); ++i) {
    for (std::size_t j = 0; j < gallery.size(); ++j) {
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = skl_distance(probe[i].skl, gallery[j].skl);
    }
  }
  return d;
}

Eigen::MatrixXd match_dvcov_skl(std::span<const DepthSample> gallery, std::span<const DepthSample> probe,
                                FusionScaling scaling) {
  Eigen::MatrixXd dv = dvcov_distance_matrix(gallery, probe);
  Eigen::MatrixXd sk = skl_distance_matrix(gallery, probe);
  if (scaling == FusionScaling::kMeanNormalized && dv.size() > 0) {
    const double mdv = dv.mean();
    const double msk = sk.mean();
    if (mdv > 0.0) dv /= mdv;
    if (msk > 0.0) sk /= msk;
  }
  return dv + sk;
}

}  // namespace dreid
