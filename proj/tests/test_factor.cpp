#include <gtest/gtest.h>

#include <cmath>

#include "deeplin/factor.hpp"
#include "oracles.hpp"

using namespace deeplin;

namespace {

Mat mat_power(const Mat& a, int n) {
  Mat p = Mat::Identity(a.rows(), a.cols());
  for (int k = 0; k < n; ++k) p = p * a;
  return p;
}

Mat deg(double degrees) { return rotation(degrees * M_PI / 180.0); }

void expect_near(const Mat& a, const Mat& b, double tol) {
  ASSERT_EQ(a.rows(), b.rows());
  EXPECT_LE((a - b).norm(), tol) << "got\n" << a << "\nwant\n" << b;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::io;
}

}  // namespace

TEST(Polar, Examples) {
  const PolarParts p = polar(2.0 * Mat::Identity(3, 3));
  expect_near(p.R, Mat::Identity(3, 3), 1e-14);
  expect_near(p.P, 2.0 * Mat::Identity(3, 3), 1e-14);
  const PolarParts q = polar(deg(40));
  expect_near(q.R, deg(40), 1e-14);
  expect_near(q.P, Mat::Identity(2, 2), 1e-14);
}

TEST(Polar, RandomInvariants) {
  oracle::Rng rng(20);
  for (int k = 0; k < 50; ++k) {
    const int d = 1 + k % 6;
    const Mat a = oracle::random_matrix(rng, d, d);
    const PolarParts p = polar(a);
    EXPECT_LE((p.R.transpose() * p.R - Mat::Identity(d, d)).norm(), 1e-10);
    EXPECT_LE((p.P - p.P.transpose()).norm(), 1e-12);
    Eigen::SelfAdjointEigenSolver<Mat> es(p.P);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
    EXPECT_LE((p.R * p.P - a).norm(), 1e-10 * a.norm());
    // SVD oracle: R = U V^T, P = V S V^T.
    Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    expect_near(p.P, svd.matrixV() * svd.singularValues().asDiagonal() * svd.matrixV().transpose(),
                1e-10 * a.norm());
  }
}

TEST(Polar, SingularInput) {
  Mat a = Mat::Ones(3, 3);
  EXPECT_EQ(code_of([&] { polar(a); }), ErrorCode::singular_input);
}

TEST(OrthogonalRoot, Examples) {
  expect_near(principal_root_orthogonal(Mat::Identity(3, 3), 5), Mat::Identity(3, 3), 1e-14);
  expect_near(principal_root_orthogonal(deg(90), 3), deg(30), 1e-13);
  Mat one(1, 1);
  one << 1;
  expect_near(principal_root_orthogonal(block_diag({deg(120), one}), 2), block_diag({deg(60), one}),
              1e-13);
  expect_near(principal_root_orthogonal(deg(-150), 5), deg(-30), 1e-13);
}

TEST(OrthogonalRoot, RandomBasisMatchesComplexOracle) {
  oracle::Rng rng(21);
  std::uniform_real_distribution<double> ang(-3.0, 3.0);
  for (int k = 0; k < 40; ++k) {
    const int d = 2 + k % 2;
    Mat core = Mat::Identity(d, d);
    core.block(0, 0, 2, 2) = rotation(ang(rng));
    const Mat q = oracle::random_orthogonal(rng, d);
    const Mat r = q * core * q.transpose();
    const int L = 2 + k % 5;
    const Mat root = principal_root_orthogonal(r, L);
    EXPECT_LE((root.transpose() * root - Mat::Identity(d, d)).norm(), 1e-10);
    EXPECT_LE((mat_power(root, L) - r).norm(), 1e-9);
    expect_near(root, oracle::principal_root(r, L), 1e-9);
  }
}

TEST(OrthogonalRoot, RootOfOneIsInput) {
  oracle::Rng rng(22);
  const Mat q = oracle::random_orthogonal(rng, 4);
  EXPECT_LE((principal_root_orthogonal(q * q, 1) - q * q).norm(), 1e-12);
}

TEST(OrthogonalRoot, MinusOneHasNoRealRoot) {
  Mat refl = Mat::Identity(3, 3);
  refl(2, 2) = -1;
  EXPECT_EQ(code_of([&] { principal_root_orthogonal(refl, 2); }), ErrorCode::no_real_root);
  EXPECT_EQ(code_of([&] { principal_root_orthogonal(deg(180), 3); }), ErrorCode::no_real_root);
  EXPECT_EQ(code_of([&] { principal_root_orthogonal(2.0 * Mat::Identity(2, 2), 2); }),
            ErrorCode::not_orthogonal);
}

TEST(SpdRoot, Examples) {
  expect_near(principal_root_spd(4.0 * Mat::Identity(2, 2), 2), 2.0 * Mat::Identity(2, 2), 1e-14);
  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 8;
  d(1, 1) = 27;
  Mat want = Mat::Zero(2, 2);
  want(0, 0) = 2;
  want(1, 1) = 3;
  expect_near(principal_root_spd(d, 3), want, 1e-13);
}

TEST(SpdRoot, RandomPowersBack) {
  oracle::Rng rng(23);
  for (int k = 0; k < 40; ++k) {
    const int d = 1 + k % 5, L = 1 + k % 7;
    const Mat p = oracle::random_spd(rng, d, 0.1, 4.0);
    const Mat b = principal_root_spd(p, L);
    EXPECT_LE((b - b.transpose()).norm(), 1e-12);
    EXPECT_LE((mat_power(b, L) - p).norm(), 1e-9 * p.norm());
    if (d <= 3) expect_near(b, oracle::principal_root(p, L), 1e-9);
  }
  const Mat p = oracle::random_spd(rng, 3, 0.5, 2.0);
  EXPECT_LE((principal_root_spd(p, 1) - p).norm(), 1e-12);
}

TEST(SpdRoot, RejectsBadInput) {
  Mat indefinite = Mat::Identity(2, 2);
  indefinite(1, 1) = -1;
  EXPECT_EQ(code_of([&] { principal_root_spd(indefinite, 2); }), ErrorCode::not_positive_definite);
  Mat asym = Mat::Identity(2, 2);
  asym(0, 1) = 0.5;
  EXPECT_EQ(code_of([&] { principal_root_spd(asym, 2); }), ErrorCode::not_symmetric);
}

TEST(Balanced, Examples) {
  const auto f = balanced_factorization(4.0 * Mat::Identity(2, 2), 2);
  ASSERT_EQ(f.factors.size(), 2u);
  for (const auto& m : f.factors) expect_near(m, 2.0 * Mat::Identity(2, 2), 1e-13);
  const auto g = balanced_factorization(deg(90), 3);
  for (const auto& m : g.factors) expect_near(m, deg(30), 1e-13);
}

TEST(Balanced, GammaPositiveInputs) {
  oracle::Rng rng(24);
  for (int k = 0; k < 100; ++k) {
    const int d = 1 + k % 6;
    const int L = std::vector<int>{2, 3, 4, 8, 16}[k % 5];
    const double gamma = k % 2 ? 0.1 : 0.5;
    const Mat a = oracle::random_gamma_positive(rng, d, gamma);
    const auto f = balanced_factorization(a, L);
    Mat prod = Mat::Identity(d, d);
    for (const auto& m : f.factors) prod = prod * m;
    EXPECT_LE((prod - a).norm(), 1e-8 * a.norm());
    EXPECT_LE(f.reconstruction_residual, 1e-8);
    EXPECT_LE(f.balance_residual, 1e-8);
    const Eigen::VectorXd sa = Eigen::JacobiSVD<Mat>(a).singularValues();
    for (const auto& m : f.factors) {
      const Eigen::VectorXd s = Eigen::JacobiSVD<Mat>(m).singularValues();
      for (int j = 0; j < d; ++j) EXPECT_NEAR(s(j), std::pow(sa(j), 1.0 / L), 1e-8);
    }
  }
}

TEST(Balanced, FactorStructure) {
  // A_i = R^{1/L} P_i with P_i similar to P^{1/L}.
  oracle::Rng rng(25);
  const Mat a = oracle::random_gamma_positive(rng, 3, 0.5);
  const int L = 4;
  const auto f = balanced_factorization(a, L);
  const PolarParts p = polar(a);
  const Mat r_root = principal_root_orthogonal(p.R, L);
  EXPECT_LE((r_root.transpose() * r_root - Mat::Identity(3, 3)).norm(), 1e-10);
  const Mat p_root = principal_root_spd(p.P, L);
  for (int i = 0; i < L; ++i) {
    const Mat pi = r_root.transpose() * f.factors[i];
    Eigen::EigenSolver<Mat> es(pi);
    std::vector<double> got, want;
    for (int k = 0; k < 3; ++k) got.push_back(es.eigenvalues()(k).real());
    Eigen::SelfAdjointEigenSolver<Mat> ps(p_root);
    for (int k = 0; k < 3; ++k) want.push_back(ps.eigenvalues()(k));
    std::sort(got.begin(), got.end());
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(got[k], want[k], 1e-9);
  }
  // The last factor has P_L = P^{1/L} exactly.
  expect_near(f.factors[L - 1], r_root * p_root, 1e-10);
}

TEST(Balanced, PropagatesRootErrors) {
  Mat refl = Mat::Identity(2, 2);
  refl(1, 1) = -1;
  EXPECT_EQ(code_of([&] { balanced_factorization(refl, 2); }), ErrorCode::no_real_root);
  EXPECT_EQ(code_of([&] { balanced_factorization(Mat::Zero(2, 2), 2); }), ErrorCode::singular_input);
}
