#include "dreid/spd.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "dreid/error.hpp"

namespace dreid {

namespace {

Eigen::LLT<Mat6> cholesky_or_throw(const Mat6& c, const char* which) {
  if (!c.allFinite()) {
    throw Error(ErrorCode::kNotPositiveDefinite, std::string(which) + " has non-finite entries");
  }
  Eigen::LLT<Mat6> llt(c);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kNotPositiveDefinite, std::string(which) + " is not positive definite");
  }
  return llt;
}

}  // namespace

GeneralizedSpectrum generalized_spectrum(const Mat6& c1, const Mat6& c2) {
  const auto llt1 = cholesky_or_throw(c1, "C1");
  cholesky_or_throw(c2, "C2");

  const auto lower = llt1.matrixL();
  Mat6 half = lower.solve(c2);                            // L^-1 C2
  Mat6 whitened = lower.solve(half.transpose());          // L^-1 C2 L^-T
  whitened = 0.5 * (whitened + whitened.transpose());

  Eigen::SelfAdjointEigenSolver<Mat6> solver(whitened, Eigen::EigenvaluesOnly);
  GeneralizedSpectrum out;
  out.lambdas = solver.eigenvalues().reverse();
  if (!(out.lambdas[5] > 0.0)) {
    throw Error(ErrorCode::kNotPositiveDefinite, "generalized spectrum is not positive");
  }
  return out;
}

double geodesic_distance(const Mat6& c1, const Mat6& c2) {
  const Vec6 l = generalized_spectrum(c1, c2).lambdas;
  return std::sqrt(l.array().log().square().sum());
}

Mat6 rotation_normalize(const Mat6& c1, const Mat6& c2) {
  cholesky_or_throw(c1, "C1");
  cholesky_or_throw(c2, "C2");
  const SortedEigen6 e1 = sorted_eigen(c1);
  const SortedEigen6 e2 = sorted_eigen(c2);
  Mat6 out = e1.vectors * e2.values.asDiagonal() * e1.vectors.transpose();
  return 0.5 * (out + out.transpose());
}

DvcovDistance dvcov_distance(const DVCovDescriptor& a, const DVCovDescriptor& b) {
  if (a.within.size() != b.within.size() || a.between.size() != b.between.size()) {
    throw Error(ErrorCode::kLayoutMismatch,
                "descriptor layouts differ (" + std::to_string(a.within.size()) + "+" +
                    std::to_string(a.between.size()) + " vs " + std::to_string(b.within.size()) +
                    "+" + std::to_string(b.between.size()) + ")");
  }
  DvcovDistance out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].empty || b[i].empty) {
      ++out.skipped;
      continue;
    }
    out.value += geodesic_distance(a[i].m, b[i].m);
    ++out.compared;
  }
  return out;
}

double Theorem1Check::deviation() const { return std::abs(lhs - rhs); }

bool Theorem1Check::holds(double rel_tol) const {
  return deviation() <= rel_tol * std::max(1.0, rhs);
}

Theorem1Check verify_theorem1(const Mat6& c1, const Mat6& c2) {
  Theorem1Check out;
  out.lhs = (eigen_depth(c2) - eigen_depth(c1)).norm();
  out.rhs = geodesic_distance(c1, rotation_normalize(c1, c2));
  return out;
}

}  // namespace dreid
