#pragma once

#include <span>
#include <vector>

#include "deeplin/matcore.hpp"

namespace deeplin {

// Ordered layers Theta_1..Theta_L; the network computes Theta_L ... Theta_1 x.
// Layer indices in this API are 0-based: layer(0) is the first layer applied.
class DeepLinearNet {
 public:
  explicit DeepLinearNet(std::vector<Mat> layers, const SizeLimits& limits = {});

  // L copies of scale * I_d.
  static DeepLinearNet identity(int d, int L, double scale = 1.0,
                                const SizeLimits& limits = {});

  int dim() const noexcept { return dim_; }
  int depth() const noexcept { return static_cast<int>(layers_.size()); }
  const Mat& layer(int i) const { return layers_.at(i); }
  std::span<const Mat> layers() const noexcept { return layers_; }
  const SizeLimits& limits() const noexcept { return limits_; }

  // End-to-end map Theta_L ... Theta_1.
  Mat product() const;

 private:
  int dim_;
  std::vector<Mat> layers_;
  SizeLimits limits_;
};

// Theta_last * ... * Theta_first for 0-based inclusive indices. An empty
// range (first > last) yields I_d, which covers the boundary layers in the
// gradient formula. Valid ranges: 0 <= first <= L, -1 <= last <= L-1.
Mat partial_product(const DeepLinearNet& net, int first, int last);

struct LossReport {
  double loss;    // 1/2 ||Theta_{1:L} - Phi||_F^2
  Mat residual;   // Theta_{1:L} - Phi
};

LossReport loss(const DeepLinearNet& net, const Mat& phi);

// Matricized gradient of the loss with respect to layer i:
// Theta_{i+1:L}^T (Theta_{1:L} - Phi) Theta_{1:i-1}^T.
Mat layer_gradient(const DeepLinearNet& net, const Mat& phi, int i);

struct GradientSet {
  std::vector<Mat> per_layer;

  // Concatenation of vec(G_i) in layer order.
  Vec flat() const;
  double squared_norm() const;
};

GradientSet full_gradient(const DeepLinearNet& net, const Mat& phi);

// Same result as full_gradient, sharing a precomputed residual.
GradientSet full_gradient(const DeepLinearNet& net, const Mat& phi,
                          const Mat& residual);

// Contraction operator (I_{d^2} (x) vec(I)^T)(I_d (x) T_{d,d} (x) I_d)
// (vec(C) (x) I_{d^2}) as a d^2 x d^2 matrix, built from its index form:
// entry (a*d + b, b*d + k) equals C(k, a).
Mat hessian_contraction(const Mat& c);

// Dense (L d^2) x (L d^2) Hessian. Flattening is layer-major with vec
// (column-major) inside each layer; block (i, j) holds the derivatives of
// the layer-i gradient coordinates with respect to layer-j coordinates.
Mat full_hessian(const DeepLinearNet& net, const Mat& phi);

}  // namespace deeplin
