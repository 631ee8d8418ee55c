#pragma once

#include <cstddef>

#include "dreid/covdesc.hpp"
#include "dreid/types.hpp"

namespace dreid {

/// Generalized eigenvalues l_k(C1, C2), i.e. the spectrum of C1^-1 C2,
/// in descending order.
struct GeneralizedSpectrum {
  Vec6 lambdas;
};

/// Cholesky-whitened: with C1 = L L^T the spectrum is that of L^-1 C2 L^-T.
/// Throws kNotPositiveDefinite if either input is not SPD.
GeneralizedSpectrum generalized_spectrum(const Mat6& c1, const Mat6& c2);

/// Affine-invariant distance sqrt(sum_k ln^2 l_k(C1, C2)).
double geodesic_distance(const Mat6& c1, const Mat6& c2);

/// C2's spectrum placed in C1's eigenbasis: U1 diag(l2 descending) U1^T.
Mat6 rotation_normalize(const Mat6& c1, const Mat6& c2);

struct DvcovDistance {
  double value = 0.0;
  std::size_t compared = 0;  // pairs that entered the sum
  std::size_t skipped = 0;   // pairs with an empty voxel on either side
  /// Every pair was skipped, so `value` is a vacuous zero.
  bool vacuous() const { return compared == 0; }
};

/// Sum of geodesic distances over corresponding matrices; pairs where either
/// side is flagged empty are skipped. Throws kLayoutMismatch.
DvcovDistance dvcov_distance(const DVCovDescriptor& a, const DVCovDescriptor& b);

struct Theorem1Check {
  double lhs = 0.0;  // ||ED(C2) - ED(C1)||
  double rhs = 0.0;  // geodesic(C1, rotation_normalize(C1, C2))
  double deviation() const;
  bool holds(double rel_tol = 1e-8) const;
};

/// Evaluates both sides of the log-eigenvalue / rotation-normalized geodesic
/// equivalence for one pair.
Theorem1Check verify_theorem1(const Mat6& c1, const Mat6& c2);

}  // namespace dreid
