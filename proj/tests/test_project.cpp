#include <gtest/gtest.h>

#include "deeplin/project.hpp"
#include "oracles.hpp"

using namespace deeplin;

namespace {

Mat diag(std::initializer_list<double> v) {
  Mat m = Mat::Zero(v.size(), v.size());
  int k = 0;
  for (double x : v) m(k, k) = x, ++k;
  return m;
}

}  // namespace

TEST(GammaPositive, SetValidation) {
  EXPECT_THROW(GammaPositiveSet(0.0), Error);
  EXPECT_THROW(GammaPositiveSet(-1.0), Error);
  const GammaPositiveSet h(0.5);
  EXPECT_TRUE(h.contains(0.5 * Mat::Identity(3, 3)));
  EXPECT_FALSE(h.contains(0.4 * Mat::Identity(3, 3)));
  EXPECT_THROW(project_gamma_positive(Mat::Identity(2, 2), 0.0), Error);
}

TEST(GammaPositive, Examples) {
  const Mat feasible = rotation(0.5) * 1.2;  // sym part 1.2 cos(0.5) I > 0.5
  EXPECT_EQ(project_gamma_positive(feasible, 0.5), feasible);
  EXPECT_LE((project_gamma_positive(diag({-1, 2}), 0.5) - diag({0.5, 2})).norm(), 1e-15);
  Mat a(2, 2), want(2, 2);
  a << 0, 1, -1, 0;
  want << 0.1, 1, -1, 0.1;
  EXPECT_LE((project_gamma_positive(a, 0.1) - want).norm(), 1e-15);
}

TEST(GammaPositive, ProjectionProperties) {
  oracle::Rng rng(30);
  std::uniform_real_distribution<double> ug(0.05, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + trial % 5;
    const double gamma = ug(rng);
    const Mat a = oracle::random_matrix(rng, d, d, -2, 2);
    const Mat y = project_gamma_positive(a, gamma);
    EXPECT_GE(min_sym_eigenvalue(y), gamma - 1e-12);
    EXPECT_LE((skew(y) - skew(a)).norm(), 1e-15 * std::max(1.0, a.norm()));
    EXPECT_GE(Eigen::JacobiSVD<Mat>(y).singularValues().minCoeff(), gamma - 1e-12);
    EXPECT_LE((project_gamma_positive(y, gamma) - y).norm(), 1e-12);
    const double dist = (a - y).norm();
    for (int s = 0; s < 1000; ++s) {
      const Mat z = oracle::random_gamma_positive(rng, d, gamma);
      EXPECT_LE(dist, (a - z).norm() + 1e-12);
    }
    const Mat b = oracle::random_matrix(rng, d, d, -2, 2);
    EXPECT_LE((y - project_gamma_positive(b, gamma)).norm(), (a - b).norm() + 1e-12);
  }
}

TEST(IdentityBall, PsdClipping) {
  EXPECT_LE((project_identity_ball(diag({3, 0.5}), {1.0, true}) - diag({2, 0.5})).norm(), 1e-15);
  const Mat inside = diag({1.5, 0.7, 1.0});
  EXPECT_EQ(project_identity_ball(inside, {0.5, true}), inside);
  // radius above 1 still keeps the psd constraint
  EXPECT_LE((project_identity_ball(diag({-1, 4}), {2.0, true}) - diag({0, 3})).norm(), 1e-15);
  Mat asym = Mat::Identity(2, 2);
  asym(0, 1) = 0.3;
  EXPECT_THROW(project_identity_ball(asym, {1.0, true}), Error);
  EXPECT_THROW(project_identity_ball(Mat::Identity(2, 2), {-0.1, false}), Error);
}

TEST(IdentityBall, PsdCommutesAndMatchesClipCost) {
  oracle::Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 2 + trial % 3;
    const double a = 0.2 + 0.1 * (trial % 7);
    const Mat x = oracle::random_spd(rng, d, -1.0, 3.0);
    const Mat y = project_identity_ball(x, {a, true});
    EXPECT_LE((x * y - y * x).norm(), 1e-12);
    Eigen::SelfAdjointEigenSolver<Mat> es(x);
    double cost = 0.0;
    for (int k = 0; k < d; ++k) {
      const double l = es.eigenvalues()(k);
      const double c = std::clamp(l, std::max(0.0, 1 - a), 1 + a);
      cost += (l - c) * (l - c);
    }
    EXPECT_NEAR((y - x).squaredNorm(), cost, 1e-12);
  }
}

TEST(IdentityBall, GeneralMode) {
  EXPECT_EQ(project_identity_ball(Mat::Identity(3, 3), {0.0, false}), Mat::Identity(3, 3));
  EXPECT_EQ(project_identity_ball(Mat::Identity(3, 3), {0.7, false}), Mat::Identity(3, 3));
  oracle::Rng rng(32);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 1 + trial % 4;
    const double psi = 0.1 + 0.05 * trial;
    const Mat a = oracle::random_matrix(rng, d, d, -2, 2);
    const Mat y = project_identity_ball(a, {psi, false});
    const Mat eye = Mat::Identity(d, d);
    EXPECT_LE(op_norm(y - eye), psi + 1e-12);
    EXPECT_LE((project_identity_ball(y, {psi, false}) - y).norm(), 1e-12);
    // symmetric inputs: both modes coincide for radius <= 1
    if (psi <= 1.0) {
      const Mat s = sym(a);
      EXPECT_LE((project_identity_ball(s, {psi, false}) - project_identity_ball(s, {psi, true})).norm(),
                1e-12);
    }
  }
}
