#include "deeplin/factor.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace deeplin {

namespace {

constexpr double kMinusOneAngleTol = 1e-8;

void require_positive_layers(int L, const char* what) {
  if (L < 1) {
    throw Error(ErrorCode::invalid_config, std::string(what) + ": L must be >= 1");
  }
}

void require_orthogonal(const Mat& r, const char* what) {
  require_square(r, what);
  require_finite(r, what);
  const double dev = (r.transpose() * r - Mat::Identity(r.rows(), r.cols())).norm();
  if (dev > 1e-10 * std::sqrt(static_cast<double>(r.rows()))) {
    throw Error(ErrorCode::not_orthogonal,
                std::string(what) + ": input is not orthogonal (||R^T R - I||_F = " +
                    std::to_string(dev) + ")");
  }
}

Mat sym_exact(const Mat& a) { return 0.5 * (a + a.transpose()); }

}  // namespace

PolarParts polar(const Mat& a) {
  require_square(a, "polar");
  require_finite(a, "polar");
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  if (s(s.size() - 1) <= 1e-12 * std::max(s(0), kAbsFloor)) {
    throw Error(ErrorCode::singular_input, "polar: input is rank deficient",
                s(s.size() - 1) > 0 ? s(0) / s(s.size() - 1)
                                    : std::numeric_limits<double>::infinity());
  }
  const Mat& u = svd.matrixU();
  const Mat& v = svd.matrixV();
  return {u * v.transpose(), sym_exact(v * s.asDiagonal() * v.transpose())};
}

OrthogonalSchur orthogonal_schur(const Mat& r) {
  require_orthogonal(r, "orthogonal_schur");
  const Eigen::Index d = r.rows();
  Eigen::RealSchur<Mat> schur(r);
  if (schur.info() != Eigen::Success) {
    throw Error(ErrorCode::numeric_failure, "orthogonal_schur: Schur iteration did not converge",
                condition_estimate(r));
  }
  const Mat& t = schur.matrixT();
  OrthogonalSchur out;
  out.Q = schur.matrixU();
  // A normal quasi-triangular matrix is block diagonal, and each 2x2 block of
  // an orthogonal one is a rotation [[c, -s], [s, c]].
  for (Eigen::Index k = 0; k < d;) {
    if (k + 1 < d && t(k + 1, k) != 0.0) {
      const double c = 0.5 * (t(k, k) + t(k + 1, k + 1));
      const double s = 0.5 * (t(k + 1, k) - t(k, k + 1));
      out.block_sizes.push_back(2);
      out.angles.push_back(std::atan2(s, c));
      k += 2;
    } else {
      out.block_sizes.push_back(1);
      out.angles.push_back(t(k, k) < 0.0 ? std::numbers::pi : 0.0);
      k += 1;
    }
  }
  return out;
}

Mat orthogonal_power(const OrthogonalSchur& schur, int power, int L) {
  require_positive_layers(L, "orthogonal_power");
  const Eigen::Index d = schur.Q.rows();
  Mat core = Mat::Zero(d, d);
  Eigen::Index k = 0;
  for (std::size_t b = 0; b < schur.block_sizes.size(); ++b) {
    const double angle = schur.angles[b];
    if (std::abs(std::abs(angle) - std::numbers::pi) < kMinusOneAngleTol) {
      throw Error(ErrorCode::no_real_root,
                  "orthogonal_power: eigenvalue at -1 has no real principal root");
    }
    if (schur.block_sizes[b] == 2) {
      core.block(k, k, 2, 2) = rotation(angle * power / L);
      k += 2;
    } else {
      core(k, k) = 1.0;
      k += 1;
    }
  }
  return schur.Q * core * schur.Q.transpose();
}

Mat principal_root_orthogonal(const Mat& r, int L) {
  require_positive_layers(L, "principal_root_orthogonal");
  const OrthogonalSchur schur = orthogonal_schur(r);
  if (L == 1) {
    // Still reject -1 eigenvalues so the contract does not depend on L.
    orthogonal_power(schur, 1, 1);
    return r;
  }
  return orthogonal_power(schur, 1, L);
}

Mat principal_root_spd(const Mat& p, int L) {
  require_positive_layers(L, "principal_root_spd");
  require_square(p, "principal_root_spd");
  require_finite(p, "principal_root_spd");
  if ((p - p.transpose()).norm() > scaled_tol(1e-12, p.norm())) {
    throw Error(ErrorCode::not_symmetric, "principal_root_spd: input is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(sym_exact(p));
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::numeric_failure, "principal_root_spd: eigen solver did not converge",
                condition_estimate(p));
  }
  const Vec& lambda = es.eigenvalues();
  if (lambda(0) <= kAbsFloor) {
    throw Error(ErrorCode::not_positive_definite,
                "principal_root_spd: smallest eigenvalue " + std::to_string(lambda(0)) +
                    " is not positive");
  }
  if (L == 1) return p;
  const Vec root = lambda.array().pow(1.0 / L).matrix();
  const Mat& v = es.eigenvectors();
  return sym_exact(v * root.asDiagonal() * v.transpose());
}

FactorizationResult balanced_factorization(const Mat& a, int L, const FactorTolerances& tol) {
  require_positive_layers(L, "balanced_factorization");
  const PolarParts pp = polar(a);
  const OrthogonalSchur schur = orthogonal_schur(pp.R);
  const Mat p_root = principal_root_spd(pp.P, L);
  const Mat r_root = orthogonal_power(schur, 1, L);

  FactorizationResult out;
  out.factors.reserve(L);
  for (int i = 1; i <= L; ++i) {
    const Mat r_part = orthogonal_power(schur, L - i, L);
    // R^{-(L-i)/L} is the transpose of R^{(L-i)/L}.
    out.factors.push_back(r_root * (r_part * p_root * r_part.transpose()));
  }

  Mat prod = Mat::Identity(a.rows(), a.cols());
  for (const auto& f : out.factors) prod = prod * f;
  out.reconstruction_residual = (prod - a).norm() / std::max(a.norm(), kAbsFloor);

  Eigen::JacobiSVD<Mat> svd_a(a);
  const Vec target = svd_a.singularValues().array().pow(1.0 / L).matrix();
  for (const auto& f : out.factors) {
    Eigen::JacobiSVD<Mat> svd_f(f);
    out.balance_residual =
        std::max(out.balance_residual, (svd_f.singularValues() - target).cwiseAbs().maxCoeff());
  }

  if (out.reconstruction_residual > tol.reconstruction || out.balance_residual > tol.balance) {
    throw Error(ErrorCode::numeric_failure,
                "balanced_factorization: residuals out of tolerance (reconstruction " +
                    std::to_string(out.reconstruction_residual) + ", balance " +
                    std::to_string(out.balance_residual) + ")",
                condition_estimate(a));
  }
  return out;
}

}  // namespace deeplin
