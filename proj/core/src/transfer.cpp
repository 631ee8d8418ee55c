#include "dreid/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "dreid/error.hpp"

namespace dreid {

namespace {

using MatrixXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using VectorXld = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

// sum_ij W_ij (k_i - k_j)(k_i - k_j)^T for a symmetric W and Gram columns k_i.
Eigen::MatrixXd kernel_scatter(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& w) {
  Eigen::MatrixXd laplacian = -w;
  laplacian.diagonal() += w.rowwise().sum();
  Eigen::MatrixXd s = 2.0 * gram * laplacian * gram;
  return 0.5 * (s + s.transpose());
}

double mean_pairwise_distance(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) total += (x.row(i) - x.row(j)).norm();
  }
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  return pairs > 0.0 ? total / pairs : 0.0;
}

double trace_weight(double weight, const Eigen::MatrixXd& b) {
  const double t = b.trace();
  return t > 0.0 ? weight / t : 0.0;
}

void check_weight(double value, const char* name) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw Error(ErrorCode::kInvalidArgument, std::string(name) + " must be a finite non-negative number");
  }
}

}  // namespace

void AuxiliaryDataset::validate() const {
  if (visual.rows() != depth.rows() || static_cast<std::size_t>(visual.rows()) != labels.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "visual, depth and label counts must agree");
  }
  if (visual.rows() == 0) throw Error(ErrorCode::kInsufficientPoints, "auxiliary set is empty");
  if (!visual.allFinite() || !depth.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "auxiliary features contain non-finite values");
  }
}

Eigen::VectorXd kernel_vector(const Eigen::MatrixXd& anchors, const Eigen::VectorXd& f, double gamma) {
  if (!(gamma > 0.0)) throw Error(ErrorCode::kInvalidArgument, "kernel bandwidth must be positive");
  if (anchors.cols() != f.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "feature has " + std::to_string(f.size()) +
                                                   " entries, anchors have " + std::to_string(anchors.cols()));
  }
  Eigen::VectorXd out(anchors.rows());
  for (Eigen::Index i = 0; i < anchors.rows(); ++i) {
    out[i] = std::exp(-gamma * (anchors.row(i).transpose() - f).squaredNorm());
  }
  return out;
}

Eigen::MatrixXd kernel_gram(const Eigen::MatrixXd& x, double gamma) {
  if (!(gamma > 0.0)) throw Error(ErrorCode::kInvalidArgument, "kernel bandwidth must be positive");
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      k(i, j) = k(j, i) = std::exp(-gamma * (x.row(i) - x.row(j)).squaredNorm());
    }
  }
  return k;
}

ScatterWeights scatter_weights(std::span<const int> labels) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  std::map<int, double> counts;
  for (int l : labels) counts[l] += 1.0;
  const double inv_n = n > 0 ? 1.0 / static_cast<double>(n) : 0.0;

  ScatterWeights w{Eigen::MatrixXd::Constant(n, n, inv_n), Eigen::MatrixXd::Zero(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (labels[static_cast<std::size_t>(i)] != labels[static_cast<std::size_t>(j)]) continue;
      const double inv_c = 1.0 / counts[labels[static_cast<std::size_t>(i)]];
      w.between(i, j) = inv_n - inv_c;
      w.within(i, j) = inv_c;
    }
  }
  return w;
}

KernelConfig default_kernel_config(const AuxiliaryDataset& aux) {
  aux.validate();
  const double dv = mean_pairwise_distance(aux.visual);
  const double dd = mean_pairwise_distance(aux.depth);
  if (!(dv > 0.0) || !(dd > 0.0)) {
    throw Error(ErrorCode::kZeroVariance, "cannot derive kernel bandwidths from coincident features");
  }
  return {1.0 / (dv * dv), 1.0 / (dd * dd)};
}

TransferProblem build_transfer_problem(const AuxiliaryDataset& aux, const TransferHyperParams& hp,
                                       const KernelConfig& kc) {
  aux.validate();
  check_weight(hp.beta, "beta");
  check_weight(hp.gamma0, "gamma0");
  check_weight(hp.gamma0p, "gamma0p");
  check_weight(hp.gamma1, "gamma1");
  check_weight(hp.gamma1p, "gamma1p");

  const Eigen::Index n = aux.size();
  std::map<int, std::vector<Eigen::Index>> classes;
  for (Eigen::Index i = 0; i < n; ++i) classes[aux.labels[static_cast<std::size_t>(i)]].push_back(i);
  if (classes.size() < 2) throw Error(ErrorCode::kTooFewClasses, "transfer needs at least 2 classes");

  const Eigen::MatrixXd kv = kernel_gram(aux.visual, kc.gamma_v);
  const Eigen::MatrixXd kd = kernel_gram(aux.depth, kc.gamma_d);
  const ScatterWeights w = scatter_weights(aux.labels);

  const Eigen::Index n2 = 2 * n;
  auto pad = [&](const Eigen::MatrixXd& s, bool depth_block) {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n2, n2);
    b.block(depth_block ? n : 0, depth_block ? n : 0, n, n) = s;
    return b;
  };
  const Eigen::MatrixXd b_bv = pad(kernel_scatter(kv, w.between), false);
  const Eigen::MatrixXd b_wv = pad(kernel_scatter(kv, w.within), false);
  const Eigen::MatrixXd b_bd = pad(kernel_scatter(kd, w.between), true);
  const Eigen::MatrixXd b_wd = pad(kernel_scatter(kd, w.within), true);

  TransferProblem p;
  p.b_vd = Eigen::MatrixXd::Zero(n2, n2);
  for (const auto& [label, rows] : classes) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n2);
    for (Eigen::Index r : rows) {
      u.head(n) += kv.col(r);
      u.tail(n) -= kd.col(r);
    }
    u /= static_cast<double>(rows.size());
    p.b_vd.noalias() += u * u.transpose();
  }
  p.b_vd /= static_cast<double>(classes.size());

  p.b1 = trace_weight(hp.gamma0, b_bv) * b_bv + trace_weight(hp.gamma1, b_bd) * b_bd;
  p.b2 = trace_weight(hp.beta, p.b_vd) * p.b_vd + trace_weight(hp.gamma0p, b_wv) * b_wv +
         trace_weight(hp.gamma1p, b_wd) * b_wd;
  p.ridge = 1e-8 * p.b2.trace() / static_cast<double>(n2);
  if (!(p.ridge > 0.0)) {
    throw Error(ErrorCode::kConditioning, "constraint matrix B2 (" + std::to_string(n2) + "x" +
                                              std::to_string(n2) + ") has zero trace");
  }
  p.b2.diagonal().array() += p.ridge;
  return p;
}

TransferModel fit_transfer(const AuxiliaryDataset& aux, const TransferHyperParams& hp, const KernelConfig& kc,
                           bool clamp_m) {
  aux.validate();
  if (hp.m < 1) throw Error(ErrorCode::kInvalidArgument, "latent dimension m must be at least 1");
  const Eigen::Index n = aux.size();
  const Eigen::Index n2 = 2 * n;
  Eigen::Index m = hp.m;
  bool clamped = false;
  if (m > n2) {
    if (!clamp_m) {
      throw Error(ErrorCode::kInvalidArgument,
                  "m = " + std::to_string(hp.m) + " exceeds 2N = " + std::to_string(n2));
    }
    m = n2;
    clamped = true;
  }

  const TransferProblem prob = build_transfer_problem(aux, hp, kc);
  const Eigen::MatrixXd& b1 = prob.b1;
  const Eigen::MatrixXd& b2 = prob.b2;
  const double ridge = prob.ridge;

  // cond(B2) sits near 1/1e-8 because of the ridge, so a double-precision
  // solve loses the B2-orthonormality of the eigenvectors at the 1e-8 level.
  // The spectrum is computed in extended precision and rounded once.
  const MatrixXld b1l = b1.cast<long double>();
  const MatrixXld b2l = b2.cast<long double>();
  Eigen::LLT<MatrixXld> llt(b2l);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kConditioning, "constraint matrix B2 (" + std::to_string(n2) + "x" +
                                              std::to_string(n2) + ") is indefinite after ridge " +
                                              std::to_string(ridge));
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXld> solver(b1l, b2l);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kConditioning, "generalized eigensolver failed on " + std::to_string(n2) + "x" +
                                              std::to_string(n2) + " problem");
  }

  MatrixXld al = solver.eigenvectors().rightCols(m).rowwise().reverse();
  const VectorXld lam_l = solver.eigenvalues().tail(m).reverse();
  for (Eigen::Index j = 0; j < al.cols(); ++j) {
    Eigen::Index at = 0;
    al.col(j).cwiseAbs().maxCoeff(&at);
    if (al(at, j) < 0.0L) al.col(j) *= -1.0L;
  }
  const Eigen::MatrixXd a = al.cast<double>();
  const Eigen::VectorXd lambdas = lam_l.cast<double>();

  TransferModel model;
  model.anchors = aux.visual;
  model.projection = a.topRows(n);
  model.depth_projection = a.bottomRows(n);
  model.kernel = kc;
  model.hyper = hp;

  TransferDiagnostics& diag = model.diagnostics;
  const TransferCheck check = check_generalized_eigenpairs(b1, b2, a, lambdas);
  diag.eigenvalues = lambdas;
  diag.residuals = check.residuals;
  diag.max_residual = check.max_residual;
  diag.orthonormality_error = check.orthonormality_error;
  diag.ridge = ridge;
  diag.omega_vd = (a.transpose() * prob.b_vd * a).trace();
  diag.objective = (a.transpose() * b1 * a).trace();
  const double lead = m > 0 ? std::max(lambdas[0], 0.0) : 0.0;
  diag.nontrivial_columns = 0;
  diag.max_residual_nontrivial = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    if (!(lambdas[j] > kNontrivialEigenRatio * lead)) break;
    ++diag.nontrivial_columns;
    diag.max_residual_nontrivial = std::max(diag.max_residual_nontrivial, check.residuals[j]);
  }
  diag.requested_m = hp.m;
  diag.clamped = clamped;

  const Eigen::MatrixXd est = kernel_gram(aux.visual, kc.gamma_v) * model.projection;  // Gram is symmetric: row i is f~_i^T A_v'
  const double mean_d = mean_pairwise_distance(est);
  model.mean_depth_distance = mean_d;
  return model;
}

TransferCheck check_generalized_eigenpairs(const Eigen::MatrixXd& b1, const Eigen::MatrixXd& b2,
                                          const Eigen::MatrixXd& a, const Eigen::VectorXd& lambdas) {
  if (b1.rows() != b1.cols() || b2.rows() != b1.rows() || b2.cols() != b1.cols() || a.rows() != b1.rows() ||
      a.cols() != lambdas.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "eigenpair check: inconsistent shapes");
  }
  const MatrixXld b1l = b1.cast<long double>();
  const MatrixXld b2l = b2.cast<long double>();
  const MatrixXld al = a.cast<long double>();
  const MatrixXld b1a = b1l * al;
  const MatrixXld b2a = b2l * al;

  TransferCheck out;
  out.residuals.resize(a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    const long double num = (b1a.col(j) - static_cast<long double>(lambdas[j]) * b2a.col(j)).norm();
    const long double den = b1a.col(j).norm();
    out.residuals[j] = static_cast<double>(den > 0.0L ? num / den : num);
  }
  out.max_residual = a.cols() > 0 ? out.residuals.maxCoeff() : 0.0;
  MatrixXld gram = al.transpose() * b2a;
  gram -= MatrixXld::Identity(a.cols(), a.cols());
  out.orthonormality_error = a.cols() > 0 ? static_cast<double>(gram.cwiseAbs().maxCoeff()) : 0.0;
  return out;
}

Eigen::VectorXd estimate_depth_feature(const TransferModel& model, const Eigen::VectorXd& f_v) {
  return model.projection.transpose() * kernel_vector(model.anchors, f_v, model.kernel.gamma_v);
}

Eigen::MatrixXd estimate_depth_features(const TransferModel& model, const Eigen::MatrixXd& visual) {
  Eigen::MatrixXd out(visual.rows(), model.projection.cols());
  for (Eigen::Index i = 0; i < visual.rows(); ++i) {
    out.row(i) = estimate_depth_feature(model, visual.row(i).transpose()).transpose();
  }
  return out;
}

double transfer_distance(const TransferModel& model, const Eigen::VectorXd& f_v1, const Eigen::VectorXd& f_v2) {
  return (estimate_depth_feature(model, f_v1) - estimate_depth_feature(model, f_v2)).norm();
}

double fuse_scores(double dist_rgb, double dist_d, double eta, double norm_rgb_mean, double norm_d_mean) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "eta must lie in [0, 1]");
  if (!(norm_rgb_mean > 0.0) || !(norm_d_mean > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "normalization means must be positive");
  }
  return (1.0 - eta) * (dist_rgb / norm_rgb_mean) + eta * (dist_d / norm_d_mean);
}

Eigen::MatrixXd fuse_score_matrices(const Eigen::MatrixXd& dist_rgb, const Eigen::MatrixXd& dist_d, double eta,
                                    double norm_rgb_mean, double norm_d_mean) {
  if (dist_rgb.rows() != dist_d.rows() || dist_rgb.cols() != dist_d.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "RGB and depth distance matrices differ in shape");
  }
  Eigen::MatrixXd out(dist_rgb.rows(), dist_rgb.cols());
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      out(i, j) = fuse_scores(dist_rgb(i, j), dist_d(i, j), eta, norm_rgb_mean, norm_d_mean);
    }
  }
  return out;
}

}  // namespace dreid
