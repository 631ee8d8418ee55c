#include "dreid/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "dreid/error.hpp"

namespace dreid {

namespace {

// Flip each column so its largest-magnitude entry is positive.
void canonicalize_signs(Eigen::MatrixXd& basis) {
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    Eigen::Index at = 0;
    basis.col(j).cwiseAbs().maxCoeff(&at);
    if (basis(at, j) < 0.0) basis.col(j) *= -1.0;
  }
}

}  // namespace

void LabeledFeatureSet::validate() const {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(features.rows()) + " samples but " + std::to_string(labels.size()) +
                    " labels");
  }
}

PcaModel pca_fit(const Eigen::MatrixXd& x, int p_max) {
  if (x.rows() < 2) throw Error(ErrorCode::kInsufficientPoints, "PCA needs at least 2 samples");
  if (p_max < 1) throw Error(ErrorCode::kInvalidArgument, "p_max must be positive");

  PcaModel model;
  model.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - model.mean.transpose();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double s0 = s.size() > 0 ? s[0] : 0.0;
  const double tol = static_cast<double>(std::max(x.rows(), x.cols())) *
                     std::numeric_limits<double>::epsilon() * s0;
  Eigen::Index rank = 0;
  while (rank < s.size() && s[rank] > tol) ++rank;
  if (!(s0 > 0.0) || rank == 0) throw Error(ErrorCode::kZeroVariance, "all samples are identical");

  const Eigen::Index p = std::min<Eigen::Index>(p_max, rank);
  model.basis = svd.matrixV().leftCols(p);
  canonicalize_signs(model.basis);
  model.variances = s.head(p).array().square() / static_cast<double>(x.rows() - 1);
  return model;
}

LdaModel lda_fit(const Eigen::MatrixXd& x, std::span<const int> labels) {
  if (static_cast<std::size_t>(x.rows()) != labels.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "LDA sample and label counts differ");
  }
  std::map<int, std::vector<Eigen::Index>> classes;
  for (Eigen::Index i = 0; i < x.rows(); ++i) classes[labels[static_cast<std::size_t>(i)]].push_back(i);
  const auto c = static_cast<Eigen::Index>(classes.size());
  if (c < 2) throw Error(ErrorCode::kTooFewClasses, "LDA needs at least 2 classes");

  LdaModel model;
  const Eigen::Index p = x.cols();
  const Eigen::VectorXd mean = x.colwise().mean().transpose();
  Eigen::MatrixXd sw = Eigen::MatrixXd::Zero(p, p);
  Eigen::MatrixXd sb = Eigen::MatrixXd::Zero(p, p);
  for (const auto& [label, rows] : classes) {
    if (rows.size() < 2) {
      model.warnings.push_back("class " + std::to_string(label) +
                               " has a single sample; it adds nothing to the within-class scatter");
    }
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(p);
    for (Eigen::Index r : rows) mu += x.row(r).transpose();
    mu /= static_cast<double>(rows.size());
    for (Eigen::Index r : rows) {
      const Eigen::VectorXd d = x.row(r).transpose() - mu;
      sw.noalias() += d * d.transpose();
    }
    const Eigen::VectorXd dm = mu - mean;
    sb.noalias() += static_cast<double>(rows.size()) * dm * dm.transpose();
  }

  double ridge = 1e-6 * sw.trace() / static_cast<double>(p);
  if (!(ridge > 0.0)) {
    ridge = 1e-6 * sb.trace() / static_cast<double>(p);
    model.warnings.push_back("within-class scatter vanishes; ridge taken from between-class scatter");
  }
  if (!(ridge > 0.0)) throw Error(ErrorCode::kZeroVariance, "LDA input has no variance");
  model.ridge = ridge;
  sw.diagonal().array() += ridge;

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(sb, sw);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kConditioning, "LDA generalized eigensolver failed");
  }
  const Eigen::Index keep = std::min<Eigen::Index>(c - 1, p);
  model.basis = solver.eigenvectors().rightCols(keep).rowwise().reverse();
  model.eigenvalues = solver.eigenvalues().tail(keep).reverse();
  canonicalize_signs(model.basis);
  return model;
}

Eigen::MatrixXd SubspaceModel::project(const Eigen::MatrixXd& rows) const {
  if (rows.cols() != mean.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "expected " + std::to_string(mean.size()) + " features, got " + std::to_string(rows.cols()));
  }
  return (rows.rowwise() - mean.transpose()) * projection;
}

SubspaceModel fit_subspace(const LabeledFeatureSet& train, int p_max) {
  train.validate();
  const PcaModel pca = pca_fit(train.features, p_max);
  const Eigen::MatrixXd reduced = (train.features.rowwise() - pca.mean.transpose()) * pca.basis;
  LdaModel lda = lda_fit(reduced, train.labels);

  SubspaceModel model;
  model.mean = pca.mean;
  model.pca_basis = pca.basis;
  model.lda_basis = std::move(lda.basis);
  model.projection = model.pca_basis * model.lda_basis;
  model.warnings = std::move(lda.warnings);
  return model;
}

}  // namespace dreid
