#pragma once

#include "deeplin/matcore.hpp"

namespace deeplin {

// { A : u^T A u >= gamma for all unit u }, i.e. lambda_min(sym(A)) >= gamma.
class GammaPositiveSet {
 public:
  explicit GammaPositiveSet(double gamma);
  double gamma() const noexcept { return gamma_; }
  bool contains(const Mat& a, double slack = kAbsFloor) const;

 private:
  double gamma_;
};

// Frobenius-nearest point of the gamma-positive set. The constraint only
// touches sym(A); its eigenvalues below gamma are raised to gamma and
// skew(A) is kept. Feasible inputs are returned unchanged.
Mat project_gamma_positive(const Mat& a, double gamma);

struct IdentityBall {
  double radius = 0.0;
  // true:  { A symmetric psd : ||A - I||_2 <= radius }, eigenvalue clipping
  //        onto [max(0, 1 - radius), 1 + radius].
  // false: { A : ||A - I||_2 <= radius }, singular values of A - I capped at
  //        radius.
  bool psd_constrained = false;
};

Mat project_identity_ball(const Mat& a, const IdentityBall& ball);

}  // namespace deeplin
