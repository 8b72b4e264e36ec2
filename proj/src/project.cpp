#include "deeplin/project.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace deeplin {

GammaPositiveSet::GammaPositiveSet(double gamma) : gamma_(gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw Error(ErrorCode::invalid_config, "GammaPositiveSet: gamma must be positive");
  }
}

bool GammaPositiveSet::contains(const Mat& a, double slack) const {
  return min_sym_eigenvalue(a) >= gamma_ - slack;
}

Mat project_gamma_positive(const Mat& a, double gamma) {
  const GammaPositiveSet set(gamma);
  require_square(a, "project_gamma_positive");
  require_finite(a, "project_gamma_positive");

  const Mat s = sym(a);
  Eigen::SelfAdjointEigenSolver<Mat> es(s);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::numeric_failure, "project_gamma_positive: eigen solver failed",
                condition_estimate(a));
  }
  const Vec& lambda = es.eigenvalues();
  if (lambda(0) >= set.gamma()) return a;

  const Vec clipped = lambda.cwiseMax(set.gamma());
  const Mat& v = es.eigenvectors();
  Mat s_new = v * clipped.asDiagonal() * v.transpose();
  s_new = sym(s_new);
  return s_new + skew(a);
}

Mat project_identity_ball(const Mat& a, const IdentityBall& ball) {
  if (!(ball.radius >= 0.0) || !std::isfinite(ball.radius)) {
    throw Error(ErrorCode::invalid_config, "project_identity_ball: radius must be >= 0");
  }
  require_square(a, "project_identity_ball");
  require_finite(a, "project_identity_ball");
  const Eigen::Index d = a.rows();
  const Mat eye = Mat::Identity(d, d);

  if (ball.psd_constrained) {
    if ((a - a.transpose()).norm() > scaled_tol(1e-10, a.norm())) {
      throw Error(ErrorCode::not_symmetric,
                  "project_identity_ball: psd-constrained mode needs a symmetric input");
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(sym(a));
    if (es.info() != Eigen::Success) {
      throw Error(ErrorCode::numeric_failure, "project_identity_ball: eigen solver failed",
                  condition_estimate(a));
    }
    const double lo = std::max(0.0, 1.0 - ball.radius);
    const double hi = 1.0 + ball.radius;
    const Vec& lambda = es.eigenvalues();
    if (lambda.minCoeff() >= lo && lambda.maxCoeff() <= hi) return a;
    const Vec clipped = lambda.cwiseMax(lo).cwiseMin(hi);
    const Mat& v = es.eigenvectors();
    return sym(v * clipped.asDiagonal() * v.transpose());
  }

  const Mat e = a - eye;
  Eigen::JacobiSVD<Mat> svd(e, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  if (s.size() == 0 || s(0) <= ball.radius) return a;
  const Vec capped = s.cwiseMin(ball.radius);
  return eye + svd.matrixU() * capped.asDiagonal() * svd.matrixV().transpose();
}

}  // namespace deeplin
