#include "deeplin/network.hpp"

#include <string>

namespace deeplin {

DeepLinearNet::DeepLinearNet(std::vector<Mat> layers, const SizeLimits& limits)
    : dim_(0), layers_(std::move(layers)), limits_(limits) {
  if (layers_.empty()) {
    throw Error(ErrorCode::shape_mismatch, "DeepLinearNet: at least one layer required");
  }
  if (static_cast<int>(layers_.size()) > limits_.max_layers) {
    throw Error(ErrorCode::size_bound,
                "DeepLinearNet: " + std::to_string(layers_.size()) +
                    " layers exceeds bound " + std::to_string(limits_.max_layers));
  }
  dim_ = static_cast<int>(layers_.front().rows());
  if (dim_ > limits_.max_dim) {
    throw Error(ErrorCode::size_bound,
                "DeepLinearNet: dimension " + std::to_string(dim_) +
                    " exceeds bound " + std::to_string(limits_.max_dim));
  }
  for (const auto& layer : layers_) {
    require_square(layer, "DeepLinearNet");
    if (layer.rows() != dim_) {
      throw Error(ErrorCode::shape_mismatch, "DeepLinearNet: layers differ in dimension");
    }
    require_finite(layer, "DeepLinearNet");
  }
}

DeepLinearNet DeepLinearNet::identity(int d, int L, double scale,
                                      const SizeLimits& limits) {
  if (d < 1 || L < 1) {
    throw Error(ErrorCode::shape_mismatch, "DeepLinearNet::identity: d, L must be >= 1");
  }
  return DeepLinearNet(std::vector<Mat>(L, scale * Mat::Identity(d, d)), limits);
}

Mat DeepLinearNet::product() const { return partial_product(*this, 0, depth() - 1); }

Mat partial_product(const DeepLinearNet& net, int first, int last) {
  const int L = net.depth();
  if (first < 0 || first > L || last < -1 || last > L - 1) {
    throw Error(ErrorCode::index_out_of_range,
                "partial_product: range [" + std::to_string(first) + ", " +
                    std::to_string(last) + "] outside a " + std::to_string(L) +
                    "-layer network");
  }
  Mat out = Mat::Identity(net.dim(), net.dim());
  for (int k = first; k <= last; ++k) out = net.layer(k) * out;
  return out;
}

LossReport loss(const DeepLinearNet& net, const Mat& phi) {
  require_square(phi, "loss");
  if (phi.rows() != net.dim()) {
    throw Error(ErrorCode::shape_mismatch, "loss: target dimension does not match network");
  }
  Mat residual = net.product() - phi;
  const double value = 0.5 * residual.squaredNorm();
  return {value, std::move(residual)};
}

Mat layer_gradient(const DeepLinearNet& net, const Mat& phi, int i) {
  if (i < 0 || i >= net.depth()) {
    throw Error(ErrorCode::index_out_of_range, "layer_gradient: layer index out of range");
  }
  const LossReport lr = loss(net, phi);
  return partial_product(net, i + 1, net.depth() - 1).transpose() * lr.residual *
         partial_product(net, 0, i - 1).transpose();
}

Vec GradientSet::flat() const {
  if (per_layer.empty()) return Vec();
  const Eigen::Index n = per_layer.front().size();
  Vec out(n * static_cast<Eigen::Index>(per_layer.size()));
  for (std::size_t i = 0; i < per_layer.size(); ++i) {
    out.segment(static_cast<Eigen::Index>(i) * n, n) = vec(per_layer[i]);
  }
  return out;
}

double GradientSet::squared_norm() const {
  double s = 0.0;
  for (const auto& g : per_layer) s += g.squaredNorm();
  return s;
}

GradientSet full_gradient(const DeepLinearNet& net, const Mat& phi) {
  const LossReport lr = loss(net, phi);
  return full_gradient(net, phi, lr.residual);
}

GradientSet full_gradient(const DeepLinearNet& net, const Mat& phi, const Mat& residual) {
  require_same_shape(residual, phi, "full_gradient");
  const int L = net.depth(), d = net.dim();
  // below[i] = Theta_{i-1}...Theta_1, above[i] = Theta_L...Theta_{i+1}.
  std::vector<Mat> below(L), above(L);
  below[0] = Mat::Identity(d, d);
  for (int i = 1; i < L; ++i) below[i] = net.layer(i - 1) * below[i - 1];
  above[L - 1] = Mat::Identity(d, d);
  for (int i = L - 2; i >= 0; --i) above[i] = above[i + 1] * net.layer(i + 1);

  GradientSet out;
  out.per_layer.reserve(L);
  for (int i = 0; i < L; ++i) {
    out.per_layer.push_back(above[i].transpose() * residual * below[i].transpose());
  }
  return out;
}

Mat hessian_contraction(const Mat& c) {
  const Eigen::Index d = c.rows();
  Mat m = Mat::Zero(d * d, d * d);
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = 0; b < d; ++b) {
      for (Eigen::Index k = 0; k < d; ++k) {
        m(a * d + b, b * d + k) = c(k, a);
      }
    }
  }
  return m;
}

Mat full_hessian(const DeepLinearNet& net, const Mat& phi) {
  const int L = net.depth(), d = net.dim();
  const int side = L * d * d;
  if (side > net.limits().max_hessian_dim) {
    throw Error(ErrorCode::size_bound,
                "full_hessian: L*d^2 = " + std::to_string(side) + " exceeds bound " +
                    std::to_string(net.limits().max_hessian_dim));
  }
  const LossReport lr = loss(net, phi);
  const Mat tdd = commutation_matrix(d, d);
  const int n = d * d;

  // pp(first, last) with the empty-range convention, 0-based inclusive.
  auto pp = [&](int first, int last) { return partial_product(net, first, last); };

  Mat h = Mat::Zero(side, side);
  for (int i = 0; i < L; ++i) {
    const Mat contraction = hessian_contraction(pp(0, i - 1).transpose());
    const Mat above_i = pp(i + 1, L - 1);
    // Diagonal block.
    const Mat k_ii = kron(above_i.transpose() * above_i, pp(0, i - 1).transpose()) * tdd;
    h.block(i * n, i * n, n, n) = contraction * k_ii;
    for (int j = i + 1; j < L; ++j) {
      const Mat above_j = pp(j + 1, L - 1);
      const Mat k_ij =
          kron(above_i.transpose() * above_j, pp(0, j - 1).transpose()) * tdd +
          kron(pp(i + 1, j - 1).transpose(), lr.residual.transpose() * above_j);
      const Mat block = contraction * k_ij;
      h.block(i * n, j * n, n, n) = block;
      h.block(j * n, i * n, n, n) = block.transpose();
    }
  }
  return h;
}

}  // namespace deeplin
