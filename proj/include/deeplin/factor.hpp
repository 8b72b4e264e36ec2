#pragma once

#include <vector>

#include "deeplin/matcore.hpp"

namespace deeplin {

struct PolarParts {
  Mat R;  // orthogonal
  Mat P;  // symmetric positive semidefinite
};

// A = R P via the SVD A = U S V^T: R = U V^T, P = V S V^T.
// Throws singular_input when sigma_min(A) <= 1e-12 * sigma_max(A).
PolarParts polar(const Mat& a);

// Real Schur form of an orthogonal matrix: R = Q * blockdiag(...) * Q^T with
// 2x2 rotation blocks and +-1 scalars. `angles` holds one entry per block
// (0 or pi for scalars), `block_sizes` the matching 1 or 2.
struct OrthogonalSchur {
  Mat Q;
  std::vector<int> block_sizes;
  std::vector<double> angles;
};

OrthogonalSchur orthogonal_schur(const Mat& r);

// R^{power/L} on the principal branch; negative powers give inverses.
// Throws no_real_root when R has an eigenvalue at -1 (|angle - pi| < 1e-8).
Mat orthogonal_power(const OrthogonalSchur& schur, int power, int L);

Mat principal_root_orthogonal(const Mat& r, int L);

// Principal L-th root of a symmetric positive definite matrix.
Mat principal_root_spd(const Mat& p, int L);

struct FactorizationResult {
  // A = factors[0] * factors[1] * ... * factors[L-1].
  std::vector<Mat> factors;
  double reconstruction_residual = 0.0;  // relative Frobenius
  double balance_residual = 0.0;         // max |sigma_k(A_i) - sigma_k(A)^{1/L}|
};

struct FactorTolerances {
  double reconstruction = 1e-8;
  double balance = 1e-8;
};

// A_i = R^{1/L} R^{(L-i)/L} P^{1/L} R^{-(L-i)/L} from the polar form A = R P.
// Throws numeric_failure when either residual exceeds its tolerance.
FactorizationResult balanced_factorization(const Mat& a, int L,
                                           const FactorTolerances& tol = {});

}  // namespace deeplin
