#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "json.hpp"

#include "deeplin/matcore.hpp"
#include "deeplin/network.hpp"
#include "deeplin/trainers.hpp"

namespace deeplin {

// Absolute slack every bound check grants before calling a violation.
inline constexpr double kBoundSlack = 1e-12;

struct Witness {
  std::string relation;    // which inequality or comparison failed
  nlohmann::json inputs;   // enough to replay the instance
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;      // rhs - lhs for "lhs <= rhs" style relations
};

enum class CheckStatus { pass, fail, skipped };

const char* to_string(CheckStatus s);

struct CheckReport {
  std::string name;
  int instances = 0;
  int violations = 0;
  int skipped = 0;
  double worst_metric = 0.0;
  std::optional<Witness> worst;
  std::map<std::string, int> breakdown;  // violations per relation
  std::string note;

  bool passed() const noexcept { return violations == 0; }
  CheckStatus status() const noexcept;

  // Folds another report of the same check into this one.
  void merge(const CheckReport& other);
};

nlohmann::json to_json(const CheckReport& r);
nlohmann::json matrix_to_json(const Mat& m);
Mat matrix_from_json(const nlohmann::json& j);
nlohmann::json net_to_json(const DeepLinearNet& net);

using GradientFn = std::function<GradientSet(const DeepLinearNet&, const Mat&)>;

// Central differences of the loss against the analytic gradient. The error
// of coordinate k is |fd_k - g_k| / max(1, |g_k|).
CheckReport fd_gradient_check(const DeepLinearNet& net, const Mat& phi, double h = 1e-5,
                              double tol = 1e-6, const GradientFn& gradient = {});

// Second-order central differences of the loss against full_hessian, absolute
// entrywise tolerance, plus the ||H - H^T||_F <= 1e-10 ||H||_F symmetry test.
CheckReport fd_hessian_check(const DeepLinearNet& net, const Mat& phi, double h = 1e-3,
                             double tol = 1e-4);

enum class LossConvention {
  halved,    // l = 1/2 ||Theta_{1:L} - Phi||^2 and its gradient (library convention)
  unhalved,  // l' = ||Theta_{1:L} - Phi||^2 = 2 l, gradient 2 G
};

// ||grad||^2 >= 4 l L (1 - a)^{2L} with a = max(0, 1 - min_i sigma_min(Theta_i)).
// Skipped when a >= 1.
CheckReport check_gradient_lower_bound(const DeepLinearNet& net, const Mat& phi,
                                       LossConvention convention = LossConvention::halved);

// ||H||_F <= 3 L d^5 (1 + z)^{2L} with z = max(0, max_i ||Theta_i||_2 - 1).
// Skipped unless ||Phi||_2 <= (1 + z)^L.
CheckReport check_hessian_upper_bound(const DeepLinearNet& net, const Mat& phi);

// Every recorded iterate commutes with Phi; with `equal_layers`, all layers
// also coincide. Needs a trace recorded with record_layers.
CheckReport check_commuting_normal(const TrainingTrace& trace, const Mat& phi,
                                   bool equal_layers = true, double tol = 1e-9);

// Replays the per-eigenvalue scalar recurrence of gd on a symmetric target
// and compares it with the recorded layers and product spectra.
CheckReport eigen_recurrence_check(const TrainingTrace& trace, const Mat& phi,
                                   double tol = 1e-9);

// Per-step recurrences selected by the trace's algorithm:
//   gd:               radius growth and the admissible-step loss contraction;
//   power_projection: projection monotonicity, the (1 - eta L gamma^2)
//                     contraction, the sigma_min floor and the U(t) bound.
CheckReport trace_recurrence_check(const TrainingTrace& trace, const Mat& phi);

// Loss never drops below 1/2 sum of squared negative eigenvalues of a
// symmetric target.
CheckReport failure_floor_check(const TrainingTrace& trace, const Mat& phi);

// 1/2 sum over negative eigenvalues mu of mu^2.
double failure_floor(const Mat& phi);

}  // namespace deeplin
