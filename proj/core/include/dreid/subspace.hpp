#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace dreid {

enum class SetRole { kTrain, kGallery, kProbe };

/// One sample per row; labels are person identities.
struct LabeledFeatureSet {
  Eigen::MatrixXd features;
  std::vector<int> labels;
  SetRole role = SetRole::kTrain;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }
  /// Throws kDimensionMismatch when row and label counts differ.
  void validate() const;
};

inline constexpr int kDefaultPcaDims = 100;

struct PcaModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd basis;      // d x p, orthonormal columns
  Eigen::VectorXd variances;  // descending, length p
};

/// Top min(p_max, rank) principal directions of the rows of `x`.
/// Throws kZeroVariance when all rows coincide.
PcaModel pca_fit(const Eigen::MatrixXd& x, int p_max = kDefaultPcaDims);

struct LdaModel {
  Eigen::MatrixXd basis;  // p x min(c-1, p)
  Eigen::VectorXd eigenvalues;
  double ridge = 0.0;
  std::vector<std::string> warnings;
};

/// Solves S_b w = l (S_w + delta I) w with delta = 1e-6 tr(S_w) / p and keeps
/// the leading min(c-1, p) directions. Throws kTooFewClasses when c < 2.
LdaModel lda_fit(const Eigen::MatrixXd& x, std::span<const int> labels);

/// PCA to at most `p_max` dimensions followed by LDA; the composed
/// projection maps a centred sample straight to the discriminant space.
struct SubspaceModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd pca_basis;
  Eigen::MatrixXd lda_basis;
  Eigen::MatrixXd projection;
  std::vector<std::string> warnings;

  Eigen::Index output_dim() const { return projection.cols(); }
  /// Projects each row.
  Eigen::MatrixXd project(const Eigen::MatrixXd& rows) const;
};

SubspaceModel fit_subspace(const LabeledFeatureSet& train, int p_max = kDefaultPcaDims);

}  // namespace dreid
