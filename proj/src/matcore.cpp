#include "deeplin/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace deeplin {

double scaled_tol(double rel, double scale) {
  return std::max(rel * scale, kAbsFloor);
}

bool all_finite(const Mat& a) { return a.allFinite(); }

void require_finite(const Mat& a, const char* what) {
  if (!a.allFinite()) {
    throw Error(ErrorCode::non_finite,
                std::string(what) + ": matrix has non-finite entries");
  }
}

void require_square(const Mat& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw Error(ErrorCode::shape_mismatch,
                std::string(what) + ": expected a non-empty square matrix, got " +
                    std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
}

void require_same_shape(const Mat& a, const Mat& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::shape_mismatch,
                std::string(what) + ": shape " + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                    "x" + std::to_string(b.cols()));
  }
}

Mat identity(int d) { return Mat::Identity(d, d); }

Mat sym(const Mat& a) { return 0.5 * (a + a.transpose()); }

Mat skew(const Mat& a) { return 0.5 * (a - a.transpose()); }

Mat rotation(double theta) {
  Mat r(2, 2);
  const double c = std::cos(theta), s = std::sin(theta);
  r << c, -s, s, c;
  return r;
}

Mat block_diag(const std::vector<Mat>& blocks) {
  Eigen::Index rows = 0, cols = 0;
  for (const auto& b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  Mat out = Mat::Zero(rows, cols);
  Eigen::Index r = 0, c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

Mat kron(const Mat& a, const Mat& b) {
  const Eigen::Index p = b.rows(), q = b.cols();
  Mat out(a.rows() * p, a.cols() * q);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * p, j * q, p, q) = a(i, j) * b;
    }
  }
  return out;
}

Vec vec(const Mat& a) {
  return Eigen::Map<const Vec>(a.data(), a.size());
}

Mat unvec(const Vec& v, int rows, int cols) {
  if (v.size() != static_cast<Eigen::Index>(rows) * cols) {
    throw Error(ErrorCode::shape_mismatch, "unvec: length does not match shape");
  }
  return Eigen::Map<const Mat>(v.data(), rows, cols);
}

Mat commutation_matrix(int m, int n) {
  if (m < 1 || n < 1) {
    throw Error(ErrorCode::shape_mismatch, "commutation_matrix: m, n must be >= 1");
  }
  Mat t = Mat::Zero(m * n, m * n);
  // A(r, c) sits at r + c*m in vec(A) and at c + r*n in vec(A^T).
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < n; ++c) {
      t(c + r * n, r + c * m) = 1.0;
    }
  }
  return t;
}

SpectralData spectral(const Mat& a, bool with_eigen, bool with_vectors) {
  SpectralData out;
  if (with_vectors) {
    Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    out.singular_values = svd.singularValues();
    out.left_vectors = svd.matrixU();
    out.right_vectors = svd.matrixV();
  } else {
    Eigen::JacobiSVD<Mat> svd(a);
    out.singular_values = svd.singularValues();
  }
  if (with_eigen && a.rows() == a.cols() && a.rows() > 0) {
    Eigen::EigenSolver<Mat> es(a, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) {
      throw Error(ErrorCode::numeric_failure,
                  "spectral: eigenvalue iteration did not converge",
                  condition_estimate(a));
    }
    out.eigenvalues = es.eigenvalues();
  }
  return out;
}

double op_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues()(0);
}

double sigma_min(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(a);
  const auto& s = svd.singularValues();
  // Rectangular inputs: the min(m, n) computed values are the nonzero
  // candidates; a tall or wide matrix has no further singular values.
  return s(s.size() - 1);
}

double frob_norm(const Mat& a) { return a.norm(); }

double min_sym_eigenvalue(const Mat& a) {
  require_square(a, "min_sym_eigenvalue");
  Eigen::SelfAdjointEigenSolver<Mat> es(sym(a), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::numeric_failure,
                "min_sym_eigenvalue: symmetric eigen solver did not converge",
                condition_estimate(a));
  }
  return es.eigenvalues()(0);
}

CVec sorted_eigenvalues(const Mat& a) {
  require_square(a, "sorted_eigenvalues");
  Eigen::EigenSolver<Mat> es(a, false);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::numeric_failure,
                "sorted_eigenvalues: eigenvalue iteration did not converge",
                condition_estimate(a));
  }
  CVec ev = es.eigenvalues();
  std::sort(ev.data(), ev.data() + ev.size(),
            [](const std::complex<double>& x, const std::complex<double>& y) {
              if (x.real() != y.real()) return x.real() < y.real();
              return x.imag() < y.imag();
            });
  return ev;
}

double condition_estimate(const Mat& a) {
  if (a.size() == 0 || !a.allFinite()) return std::numeric_limits<double>::infinity();
  Eigen::JacobiSVD<Mat> svd(a);
  const auto& s = svd.singularValues();
  const double lo = s(s.size() - 1);
  return lo > 0.0 ? s(0) / lo : std::numeric_limits<double>::infinity();
}

}  // namespace deeplin
