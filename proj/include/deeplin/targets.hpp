#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "deeplin/matcore.hpp"

namespace deeplin {

enum class TargetKind { spd, rotation, partial_reflection, neg_eig_diag, near_identity, explicit_matrix };

const char* to_string(TargetKind k);
TargetKind parse_target_kind(const std::string& s);

struct TargetSpec {
  TargetKind kind = TargetKind::explicit_matrix;
  int d = 0;
  std::vector<double> eigenvalues;  // spd
  std::vector<double> angles;       // rotation, radians, one per 2x2 block
  std::vector<double> scales;       // rotation, optional per-block scale
  double a = 1.0, b = 0.0;          // partial_reflection: a I + b (I - 2 u u^T)
  double lambda = 0.0;              // neg_eig_diag
  double excess = 0.0;              // near_identity: 1/2 ||I - Phi||_F^2
  Mat matrix;                       // explicit
  std::uint64_t seed = 0;
};

struct Target {
  Mat phi;
  double margin = 0.0;  // lambda_min(sym(Phi)), the gamma-positivity margin
};

Target make_target(const TargetSpec& spec);

// Haar-ish orthogonal matrix from the QR of a seeded standard normal matrix,
// columns sign-normalized so that R has a positive diagonal.
Mat random_orthogonal(int d, std::uint64_t seed);

TargetSpec target_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TargetSpec& spec);

}  // namespace deeplin
