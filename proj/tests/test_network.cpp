#include <gtest/gtest.h>

#include <cmath>

#include "deeplin/network.hpp"
#include "oracles.hpp"

using namespace deeplin;

namespace {

Mat diag2(double a, double b) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

DeepLinearNet random_net(oracle::Rng& rng, int d, int L) {
  std::vector<Mat> layers;
  for (int i = 0; i < L; ++i) layers.push_back(oracle::random_matrix(rng, d, d));
  return DeepLinearNet(std::move(layers));
}

Mat scalar(double x) {
  Mat m(1, 1);
  m << x;
  return m;
}

}  // namespace

TEST(Network, ConstructionValidates) {
  EXPECT_THROW(DeepLinearNet(std::vector<Mat>{}), Error);
  EXPECT_THROW(DeepLinearNet({Mat::Identity(2, 2), Mat::Identity(3, 3)}), Error);
  EXPECT_THROW(DeepLinearNet({Mat::Ones(2, 3)}), Error);
  Mat bad = Mat::Identity(2, 2);
  bad(1, 1) = INFINITY;
  EXPECT_THROW(DeepLinearNet({bad}), Error);
  SizeLimits small;
  small.max_layers = 2;
  try {
    DeepLinearNet::identity(2, 3, 1.0, small);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::size_bound);
  }
  small.max_dim = 1;
  EXPECT_THROW(DeepLinearNet::identity(2, 1, 1.0, small), Error);
}

TEST(Network, PartialProducts) {
  const auto id = DeepLinearNet::identity(3, 4);
  EXPECT_EQ(partial_product(id, 0, 3), Mat::Identity(3, 3));
  EXPECT_EQ(partial_product(id, 2, 1), Mat::Identity(3, 3));
  EXPECT_EQ(partial_product(id, 4, 3), Mat::Identity(3, 3));
  EXPECT_EQ(partial_product(id, 0, -1), Mat::Identity(3, 3));

  const DeepLinearNet net({diag2(2, 1), diag2(3, 1)});
  EXPECT_EQ(partial_product(net, 0, 1), diag2(6, 1));
  EXPECT_EQ(net.product(), diag2(6, 1));

  oracle::Rng rng(10);
  const auto r = random_net(rng, 3, 4);
  EXPECT_LE((partial_product(r, 1, 2) - r.layer(2) * r.layer(1)).norm(), 1e-15);

  for (auto [f, l] : {std::pair{-1, 0}, std::pair{0, 4}, std::pair{5, 3}, std::pair{0, -2}}) {
    try {
      partial_product(id, f, l);
      FAIL() << f << "," << l;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::index_out_of_range);
    }
  }
}

TEST(Network, LossExamples) {
  const auto id2 = DeepLinearNet::identity(2, 3);
  EXPECT_EQ(loss(id2, Mat::Identity(2, 2)).loss, 0.0);
  EXPECT_DOUBLE_EQ(loss(id2, diag2(2, 1)).loss, 0.5);
  Mat phi = Mat::Identity(3, 3);
  phi(0, 0) = -0.8;
  const LossReport r = loss(DeepLinearNet::identity(3, 4), phi);
  EXPECT_NEAR(r.loss, 1.62, 1e-15);
  EXPECT_DOUBLE_EQ(r.loss, 0.5 * r.residual.squaredNorm());
  EXPECT_THROW(loss(id2, Mat::Identity(3, 3)), Error);
}

TEST(Network, GradientAtIdentityIsResidual) {
  oracle::Rng rng(11);
  const Mat phi = oracle::random_matrix(rng, 3, 3);
  const auto net = DeepLinearNet::identity(3, 5);
  const GradientSet g = full_gradient(net, phi);
  for (int i = 0; i < 5; ++i) {
    EXPECT_LE((g.per_layer[i] - (Mat::Identity(3, 3) - phi)).norm(), 1e-15);
    EXPECT_LE((layer_gradient(net, phi, i) - g.per_layer[i]).norm(), 1e-15);
  }
  // ||grad||^2 = L ||I - Phi||^2 = 2 L l.
  EXPECT_NEAR(g.squared_norm(), 2 * 5 * loss(net, phi).loss, 1e-12);
}

TEST(Network, ScalarGradient) {
  const double a = 1.3, phi = 0.7;
  const DeepLinearNet net({scalar(a), scalar(a)});
  EXPECT_NEAR(layer_gradient(net, scalar(phi), 0)(0, 0), a * (a * a - phi), 1e-15);
  // d=1, L=3: d l / d theta_i = (prod - phi) prod_{k != i} theta_k.
  const DeepLinearNet n3({scalar(0.5), scalar(-1.5), scalar(2.0)});
  const double prod = 0.5 * -1.5 * 2.0;
  const double want[] = {(prod - phi) * -3.0, (prod - phi) * 1.0, (prod - phi) * -0.75};
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(layer_gradient(n3, scalar(phi), i)(0, 0), want[i], 1e-14);
}

TEST(Network, GradientZeroAtExactFit) {
  oracle::Rng rng(12);
  const auto net = random_net(rng, 3, 3);
  const GradientSet g = full_gradient(net, net.product());
  EXPECT_EQ(g.flat().norm(), 0.0);
}

TEST(Network, GradientMatchesCentralDifferences) {
  oracle::Rng rng(13);
  const double h = 1e-5;
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + trial % 4, L = 1 + (trial / 4) % 4;
    std::vector<Mat> layers;
    for (int i = 0; i < L; ++i) layers.push_back(oracle::random_matrix(rng, d, d));
    const Mat phi = oracle::random_matrix(rng, d, d);
    const GradientSet g = full_gradient(DeepLinearNet(layers), phi);
    for (int i = 0; i < L; ++i)
      for (int k = 0; k < d * d; ++k) {
        auto up = layers, down = layers;
        up[i].data()[k] += h;
        down[i].data()[k] -= h;
        const double fd = (oracle::loss(up, phi) - oracle::loss(down, phi)) / (2 * h);
        const double an = g.per_layer[i].data()[k];
        EXPECT_LE(std::abs(fd - an) / std::max(1.0, std::abs(an)), 1e-6);
      }
  }
}

TEST(Network, FlatIsLayerMajorVec) {
  oracle::Rng rng(14);
  const auto net = random_net(rng, 2, 3);
  const Mat phi = oracle::random_matrix(rng, 2, 2);
  const GradientSet g = full_gradient(net, phi);
  const Vec f = g.flat();
  ASSERT_EQ(f.size(), 12);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(f.segment(4 * i, 4), oracle::vec(g.per_layer[i]));
  EXPECT_NEAR(g.squared_norm(), f.squaredNorm(), 1e-14);
}

TEST(Hessian, ContractionIndexForm) {
  // Build the operator from its Kronecker definition and compare.
  oracle::Rng rng(15);
  for (int d = 1; d <= 3; ++d) {
    const Mat c = oracle::random_matrix(rng, d, d);
    const int n = d * d;
    const Mat eye_d = Mat::Identity(d, d), eye_n = Mat::Identity(n, n);
    const Mat left = oracle::kron(eye_n, oracle::vec(eye_d).transpose());
    const Mat mid = oracle::kron(oracle::kron(eye_d, oracle::commutation(d, d)), eye_d);
    const Mat right = oracle::kron(oracle::vec(c), eye_n);
    EXPECT_LE((hessian_contraction(c) - left * mid * right).norm(), 1e-14);
  }
}

TEST(Hessian, ScalarAllOnes) {
  for (int L = 1; L <= 5; ++L) {
    const Mat h = full_hessian(DeepLinearNet::identity(1, L), scalar(1.0));
    EXPECT_LE((h - Mat::Ones(L, L)).norm(), 1e-15);
  }
}

TEST(Hessian, ScalarClosedForm) {
  oracle::Rng rng(16);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 100; ++trial) {
    const int L = 1 + trial % 5;
    std::vector<double> th;
    std::vector<Mat> layers;
    for (int i = 0; i < L; ++i) {
      th.push_back(u(rng));
      layers.push_back(scalar(th.back()));
    }
    const double phi = u(rng);
    const Mat want = oracle::scalar_hessian(th, phi);
    const Mat got = full_hessian(DeepLinearNet(layers), scalar(phi));
    EXPECT_LE((got - want).norm(), 1e-10 * std::max(1.0, want.norm()));
  }
}

TEST(Hessian, MatchesSecondDifferencesAndIsSymmetric) {
  oracle::Rng rng(17);
  const double h = 1e-3;
  for (auto [d, L] : {std::pair{2, 3}, std::pair{2, 2}, std::pair{3, 2}}) {
    std::vector<Mat> layers;
    for (int i = 0; i < L; ++i) layers.push_back(oracle::random_matrix(rng, d, d));
    const Mat phi = oracle::random_matrix(rng, d, d);
    const Mat hess = full_hessian(DeepLinearNet(layers), phi);
    const int n = d * d;
    EXPECT_LE((hess - hess.transpose()).norm(), 1e-10 * hess.norm());
    auto at = [&](int p, int q, double dp, double dq) {
      auto ls = layers;
      ls[p / n].data()[p % n] += dp;
      ls[q / n].data()[q % n] += dq;
      return oracle::loss(ls, phi);
    };
    for (int p = 0; p < L * n; ++p)
      for (int q = 0; q < L * n; ++q) {
        const double fd = (at(p, q, h, h) - at(p, q, h, -h) - at(p, q, -h, h) + at(p, q, -h, -h)) / (4 * h * h);
        EXPECT_NEAR(hess(p, q), fd, 1e-4) << p << "," << q;
      }
  }
}

TEST(Hessian, SizeBound) {
  SizeLimits lim;
  lim.max_hessian_dim = 10;
  const auto net = DeepLinearNet::identity(2, 3, 1.0, lim);
  try {
    full_hessian(net, Mat::Identity(2, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::size_bound);
  }
}
