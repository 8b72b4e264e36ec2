#pragma once

// Dense small-matrix kernel shared by every other module. Storage is
// Eigen's column-major MatrixXd, so vec() is a plain reinterpretation.

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <vector>

#include "deeplin/errors.hpp"

namespace deeplin {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

struct SizeLimits {
  int max_dim = 16;
  int max_layers = 64;
  // Bound on L*d^2, the side of the assembled Hessian.
  int max_hessian_dim = 1024;
};

// Absolute floor used by every scale-relative tolerance.
inline constexpr double kAbsFloor = 1e-12;

// max(rel * scale, kAbsFloor)
double scaled_tol(double rel, double scale);

bool all_finite(const Mat& a);
void require_finite(const Mat& a, const char* what);
void require_square(const Mat& a, const char* what);
void require_same_shape(const Mat& a, const Mat& b, const char* what);

Mat identity(int d);
Mat sym(const Mat& a);
Mat skew(const Mat& a);

// 2x2 counter-clockwise rotation by theta radians.
Mat rotation(double theta);
Mat block_diag(const std::vector<Mat>& blocks);

Mat kron(const Mat& a, const Mat& b);

// Column-major stacking, returned as an (m*n) x 1 column.
Vec vec(const Mat& a);
Mat unvec(const Vec& v, int rows, int cols);

// T_{m,n}: the mn x mn permutation with T vec(A) = vec(A^T) for A m x n.
Mat commutation_matrix(int m, int n);

struct SpectralData {
  Vec singular_values;                 // descending, >= 0
  std::optional<CVec> eigenvalues;     // square inputs only
  std::optional<Mat> left_vectors;     // U of A = U S V^T
  std::optional<Mat> right_vectors;    // V
};

// Singular values always; eigenvalues when `with_eigen` and A is square;
// singular vectors when `with_vectors`.
SpectralData spectral(const Mat& a, bool with_eigen = true,
                      bool with_vectors = false);

double op_norm(const Mat& a);
double sigma_min(const Mat& a);
double frob_norm(const Mat& a);

// Smallest eigenvalue of the symmetric part.
double min_sym_eigenvalue(const Mat& a);

// Eigenvalues of a square matrix sorted by (real, imag) ascending.
CVec sorted_eigenvalues(const Mat& a);

double condition_estimate(const Mat& a);

}  // namespace deeplin
