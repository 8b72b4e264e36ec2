#pragma once
// Test-side reference implementations. Deliberately naive: loops over
// definitions instead of sharing code with the library.

#include <Eigen/Dense>
#include <complex>
#include <random>
#include <vector>

namespace oracle {

using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using Rng = std::mt19937_64;

inline Mat random_matrix(Rng& rng, int rows, int cols, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = u(rng);
  return m;
}

inline Mat near_identity(Rng& rng, int d, double radius) {
  Mat e = random_matrix(rng, d, d);
  const double s = Eigen::JacobiSVD<Mat>(e).singularValues()(0);
  return Mat::Identity(d, d) + (s > 0 ? radius / s : 0.0) * e;
}

// Block (i, j) is a(i, j) * b.
inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      for (int k = 0; k < b.rows(); ++k)
        for (int l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

inline Eigen::VectorXd vec(const Mat& a) {
  Eigen::VectorXd v(a.size());
  int n = 0;
  for (int j = 0; j < a.cols(); ++j)
    for (int i = 0; i < a.rows(); ++i) v(n++) = a(i, j);
  return v;
}

// Column k of T_{m,n} is vec(E^T) for the basis matrix E with vec(E) = e_k.
inline Mat commutation(int m, int n) {
  Mat t = Mat::Zero(m * n, m * n);
  for (int k = 0; k < m * n; ++k) {
    Mat e = Mat::Zero(m, n);
    e(k % m, k / m) = 1.0;
    t.col(k) = vec(e.transpose());
  }
  return t;
}

inline Mat product(const std::vector<Mat>& layers) {
  Mat p = Mat::Identity(layers.front().rows(), layers.front().cols());
  for (const auto& l : layers) p = l * p;
  return p;
}

inline double loss(const std::vector<Mat>& layers, const Mat& phi) {
  return 0.5 * (product(layers) - phi).squaredNorm();
}

// Scalar-layer Hessian of 1/2 (prod theta - phi)^2.
inline Mat scalar_hessian(const std::vector<double>& th, double phi) {
  const int L = static_cast<int>(th.size());
  auto prod_except = [&](int i, int j) {
    double p = 1.0;
    for (int k = 0; k < L; ++k)
      if (k != i && k != j) p *= th[k];
    return p;
  };
  const double r = prod_except(-1, -1) - phi;
  Mat h(L, L);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j)
      h(i, j) = i == j ? prod_except(i, -1) * prod_except(i, -1)
                       : prod_except(i, -1) * prod_except(j, -1) + r * prod_except(i, j);
  return h;
}

// Principal L-th root through exp(log(.)/L) on a complex eigendecomposition.
// Only sensible for small diagonalizable inputs without eigenvalues on (-inf, 0].
inline Mat principal_root(const Mat& a, int L) {
  Eigen::ComplexEigenSolver<CMat> es(a.cast<std::complex<double>>());
  Eigen::VectorXcd lam = es.eigenvalues();
  for (int k = 0; k < lam.size(); ++k) lam(k) = std::exp(std::log(lam(k)) / static_cast<double>(L));
  const CMat v = es.eigenvectors();
  return (v * lam.asDiagonal() * v.inverse()).real();
}

// Layers updated one after another, each seeing the already-updated ones.
inline std::vector<Mat> sequential_gd_step(std::vector<Mat> layers, const Mat& phi, double eta) {
  const int L = static_cast<int>(layers.size());
  const int d = static_cast<int>(phi.rows());
  for (int i = 0; i < L; ++i) {
    Mat below = Mat::Identity(d, d), above = Mat::Identity(d, d);
    for (int k = 0; k < i; ++k) below = layers[k] * below;
    for (int k = i + 1; k < L; ++k) above = layers[k] * above;
    const Mat residual = product(layers) - phi;
    layers[i] -= eta * above.transpose() * residual * below.transpose();
  }
  return layers;
}

inline Mat random_orthogonal(Rng& rng, int d) {
  Eigen::HouseholderQR<Mat> qr(random_matrix(rng, d, d));
  return qr.householderQ() * Mat::Identity(d, d);
}

inline Mat random_spd(Rng& rng, int d, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd lam(d);
  for (int k = 0; k < d; ++k) lam(k) = u(rng);
  const Mat q = random_orthogonal(rng, d);
  Mat s = q * lam.asDiagonal() * q.transpose();
  return 0.5 * (s + s.transpose());
}

// sym(A) has eigenvalues in [gamma, gamma + 2], plus a random skew part.
inline Mat random_gamma_positive(Rng& rng, int d, double gamma) {
  const Mat k = random_matrix(rng, d, d);
  return random_spd(rng, d, gamma, gamma + 2.0) + 0.5 * (k - k.transpose());
}

}  // namespace oracle
