#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace dreid {

/// Paired RGB/depth training data; row i of `visual` and of `depth` describe
/// the same sample.
struct AuxiliaryDataset {
  Eigen::MatrixXd visual;
  Eigen::MatrixXd depth;
  std::vector<int> labels;

  Eigen::Index size() const { return visual.rows(); }
  void validate() const;
};

struct KernelConfig {
  double gamma_v = 1.0;
  double gamma_d = 1.0;
};

struct TransferHyperParams {
  double beta = 10.0;
  double gamma1 = 10.0;
  double gamma1p = 10.0;
  double gamma0 = 1.0;
  double gamma0p = 1.0;
  int m = 700;
};

struct TransferDiagnostics {
  Eigen::VectorXd eigenvalues;  // kept, descending
  Eigen::VectorXd residuals;    // ||B1 a - l B2 a|| / ||B1 a|| per kept column
  double max_residual = 0.0;
  double orthonormality_error = 0.0;  // max |A^T B2 A - I|
  double ridge = 0.0;
  double omega_vd = 0.0;  // tr(A^T B_vd A) over kept columns
  double objective = 0.0;  // tr(A^T B1 A) over kept columns
  /// Leading columns with eigenvalue above kNontrivialEigenRatio times the
  /// largest; the rest span the null space of B1 (rank at most 2(C-1)), where
  /// the relative residual compares rounding noise with rounding noise.
  int nontrivial_columns = 0;
  double max_residual_nontrivial = 0.0;
  int requested_m = 0;
  bool clamped = false;
};

inline constexpr double kNontrivialEigenRatio = 1e-9;

struct TransferModel {
  Eigen::MatrixXd anchors;     // N x d_v training visual features
  Eigen::MatrixXd projection;  // N x m, visual block of the eigenvectors
  Eigen::MatrixXd depth_projection;  // N x m, depth block (kept for analysis)
  KernelConfig kernel;
  TransferHyperParams hyper;
  TransferDiagnostics diagnostics;
  /// Mean estimated-depth distance over training pairs, for score fusion.
  double mean_depth_distance = 0.0;

  Eigen::Index latent_dim() const { return projection.cols(); }
};

/// exp(-gamma ||a_i - f||^2) against every anchor row.
Eigen::VectorXd kernel_vector(const Eigen::MatrixXd& anchors, const Eigen::VectorXd& f, double gamma);

/// Gram matrix of the rows of `x` under the Gaussian kernel.
Eigen::MatrixXd kernel_gram(const Eigen::MatrixXd& x, double gamma);

struct ScatterWeights {
  Eigen::MatrixXd between;
  Eigen::MatrixXd within;
};
ScatterWeights scatter_weights(std::span<const int> labels);

/// gamma = 1 / (mean pairwise distance)^2 for each modality.
KernelConfig default_kernel_config(const AuxiliaryDataset& aux);

/// Throws kInvalidArgument for m > 2N when `clamp_m` is false, kConditioning
/// when B2 stays indefinite after the ridge.
TransferModel fit_transfer(const AuxiliaryDataset& aux, const TransferHyperParams& hp, const KernelConfig& kc,
                           bool clamp_m = true);

struct TransferCheck {
  Eigen::VectorXd residuals;  // ||B1 a - l B2 a|| / ||B1 a||
  double max_residual = 0.0;
  double orthonormality_error = 0.0;  // max |A^T B2 A - I|
};

/// Residuals and B2-orthonormality of eigenpairs, accumulated in extended
/// precision so the measurement itself is not limited by cond(B2).
TransferCheck check_generalized_eigenpairs(const Eigen::MatrixXd& b1, const Eigen::MatrixXd& b2,
                                          const Eigen::MatrixXd& a, const Eigen::VectorXd& lambdas);

/// The B1 and B2 matrices fit_transfer solves with (B2 already ridged).
struct TransferProblem {
  Eigen::MatrixXd b1;
  Eigen::MatrixXd b2;
  Eigen::MatrixXd b_vd;
  double ridge = 0.0;
};
TransferProblem build_transfer_problem(const AuxiliaryDataset& aux, const TransferHyperParams& hp,
                                       const KernelConfig& kc);

Eigen::VectorXd estimate_depth_feature(const TransferModel& model, const Eigen::VectorXd& f_v);

/// Estimated depth features for every row of `visual`.
Eigen::MatrixXd estimate_depth_features(const TransferModel& model, const Eigen::MatrixXd& visual);

double transfer_distance(const TransferModel& model, const Eigen::VectorXd& f_v1, const Eigen::VectorXd& f_v2);

double fuse_scores(double dist_rgb, double dist_d, double eta, double norm_rgb_mean, double norm_d_mean);

Eigen::MatrixXd fuse_score_matrices(const Eigen::MatrixXd& dist_rgb, const Eigen::MatrixXd& dist_d, double eta,
                                    double norm_rgb_mean, double norm_d_mean);

}  // namespace dreid
