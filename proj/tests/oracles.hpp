#pragma once

// Reference implementations used to check the library. Each one is written
// the slow, obvious way and shares no code with core.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dreid/types.hpp"

namespace oracle {

using dreid::Mat6;
using dreid::Vec6;

// Cyclic Jacobi rotations on a symmetric matrix; eigenvalues descending.
inline Eigen::VectorXd jacobi_eigenvalues(Eigen::MatrixXd a, int sweeps = 100) {
  const Eigen::Index n = a.rows();
  for (int s = 0; s < sweeps; ++s) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-300) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> d(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) d[static_cast<std::size_t>(i)] = a(i, i);
  std::sort(d.begin(), d.end(), std::greater<>());
  return Eigen::Map<Eigen::VectorXd>(d.data(), n);
}

inline Mat6 two_pass_covariance(std::span<const Vec6> f) {
  Vec6 mean = Vec6::Zero();
  for (const auto& v : f) mean += v;
  mean /= static_cast<double>(f.size());
  Mat6 c = Mat6::Zero();
  for (const auto& v : f) c += (v - mean) * (v - mean).transpose();
  return c / static_cast<double>(f.size() - 1);
}

inline Mat6 double_loop_between(std::span<const Vec6> p, std::span<const Vec6> q) {
  Mat6 c = Mat6::Zero();
  for (const auto& a : p)
    for (const auto& b : q) c += (a - b) * (a - b).transpose();
  return c / static_cast<double>(p.size() * q.size());
}

// Generalized eigenvalues as the spectrum of the unsymmetric C1^-1 C2.
inline Vec6 unsymmetric_generalized_eigenvalues(const Mat6& c1, const Mat6& c2) {
  const Mat6 m = c1.inverse() * c2;
  Eigen::EigenSolver<Mat6> es(m);
  std::vector<double> v;
  for (int i = 0; i < 6; ++i) v.push_back(es.eigenvalues()(i).real());
  std::sort(v.begin(), v.end(), std::greater<>());
  return Eigen::Map<Vec6>(v.data());
}

inline double geodesic_via_unsymmetric(const Mat6& c1, const Mat6& c2) {
  const Vec6 l = unsymmetric_generalized_eigenvalues(c1, c2);
  double s = 0.0;
  for (int i = 0; i < 6; ++i) s += std::log(l(i)) * std::log(l(i));
  return std::sqrt(s);
}

// Rank of the probe's class when classes are ordered by their nearest gallery
// entry, ties going to the class whose nearest entry appears first.
inline std::size_t brute_force_rank(const Eigen::MatrixXd& dist, const std::vector<int>& gallery_labels,
                                    int probe_label, Eigen::Index row) {
  struct Best {
    double d;
    Eigen::Index first;
  };
  std::map<int, Best> best;
  for (Eigen::Index j = 0; j < dist.cols(); ++j) {
    const int c = gallery_labels[static_cast<std::size_t>(j)];
    auto it = best.find(c);
    if (it == best.end() || dist(row, j) < it->second.d) best[c] = {dist(row, j), j};
  }
  auto own = best.find(probe_label);
  if (own == best.end()) return 0;
  std::size_t rank = 1;
  for (const auto& [c, b] : best) {
    if (c == probe_label) continue;
    if (b.d < own->second.d || (b.d == own->second.d && b.first < own->second.first)) ++rank;
  }
  return rank;
}

inline std::vector<double> brute_force_cmc(const Eigen::MatrixXd& dist, const std::vector<int>& gallery_labels,
                                           const std::vector<int>& probe_labels, std::size_t k_max) {
  std::vector<double> acc(k_max, 0.0);
  for (Eigen::Index i = 0; i < dist.rows(); ++i) {
    const std::size_t r = brute_force_rank(dist, gallery_labels, probe_labels[static_cast<std::size_t>(i)], i);
    if (r == 0) continue;
    for (std::size_t k = r; k <= k_max; ++k) acc[k - 1] += 1.0;
  }
  for (auto& a : acc) a /= static_cast<double>(dist.rows());
  return acc;
}

// sum_ij w_ij (f_i - f_j)(f_i - f_j)^T over the rows of f.
inline Eigen::MatrixXd pairwise_scatter(const Eigen::MatrixXd& f, const Eigen::MatrixXd& w) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(f.cols(), f.cols());
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    for (Eigen::Index j = 0; j < f.rows(); ++j) {
      const Eigen::VectorXd d = (f.row(i) - f.row(j)).transpose();
      s += w(i, j) * d * d.transpose();
    }
  }
  return s;
}

inline double gaussian_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double gamma) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) s += (a(i) - b(i)) * (a(i) - b(i));
  return std::exp(-gamma * s);
}

}  // namespace oracle
