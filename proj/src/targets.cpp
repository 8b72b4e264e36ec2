#include "deeplin/targets.hpp"

#include <cmath>
#include <random>

#include "deeplin/errors.hpp"
#include "deeplin/verify.hpp"

namespace deeplin {

namespace {

[[noreturn]] void bad(const std::string& what) {
  throw Error(ErrorCode::invalid_config, "target: " + what);
}

Mat standard_normal(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat m(rows, cols);
  // Fill in a fixed order so the matrix only depends on the seed.
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = n(rng);
  return m;
}

}  // namespace

const char* to_string(TargetKind k) {
  switch (k) {
    case TargetKind::spd: return "spd";
    case TargetKind::rotation: return "rotation";
    case TargetKind::partial_reflection: return "partial_reflection";
    case TargetKind::neg_eig_diag: return "neg_eig_diag";
    case TargetKind::near_identity: return "near_identity";
    case TargetKind::explicit_matrix: return "explicit";
  }
  return "unknown";
}

TargetKind parse_target_kind(const std::string& s) {
  for (auto k : {TargetKind::spd, TargetKind::rotation, TargetKind::partial_reflection,
                 TargetKind::neg_eig_diag, TargetKind::near_identity, TargetKind::explicit_matrix}) {
    if (s == to_string(k)) return k;
  }
  bad("unknown kind '" + s + "'");
}

Mat random_orthogonal(int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Mat g = standard_normal(d, d, rng);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ() * Mat::Identity(d, d);
  const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int k = 0; k < d; ++k) {
    if (r(k, k) < 0.0) q.col(k) = -q.col(k);
  }
  return q;
}

Target make_target(const TargetSpec& spec) {
  const int d = spec.d;
  if (spec.kind != TargetKind::explicit_matrix && d < 1) bad("d must be positive");
  Mat phi;
  switch (spec.kind) {
    case TargetKind::spd: {
      if (static_cast<int>(spec.eigenvalues.size()) != d) bad("spd needs d eigenvalues");
      Vec lam(d);
      for (int k = 0; k < d; ++k) {
        if (!(spec.eigenvalues[k] > 0.0)) bad("spd eigenvalues must be positive");
        lam(k) = spec.eigenvalues[k];
      }
      const Mat q = random_orthogonal(d, spec.seed);
      phi = sym(q * lam.asDiagonal() * q.transpose());
      break;
    }
    case TargetKind::rotation: {
      const int blocks = static_cast<int>(spec.angles.size());
      if (blocks == 0 || 2 * blocks > d) bad("rotation needs 1..d/2 angles");
      if (!spec.scales.empty() && static_cast<int>(spec.scales.size()) != blocks) {
        bad("rotation scales must match angles");
      }
      phi = Mat::Identity(d, d);
      for (int k = 0; k < blocks; ++k) {
        const double s = spec.scales.empty() ? 1.0 : spec.scales[k];
        phi.block(2 * k, 2 * k, 2, 2) = s * rotation(spec.angles[k]);
      }
      break;
    }
    case TargetKind::partial_reflection: {
      if (!(std::abs(spec.b) < spec.a) || spec.a <= 0.0) bad("partial_reflection needs 0 <= |b| < a");
      std::mt19937_64 rng(spec.seed);
      Vec u = standard_normal(d, 1, rng).col(0);
      u /= u.norm();
      const Mat refl = Mat::Identity(d, d) - 2.0 * u * u.transpose();
      phi = spec.a * Mat::Identity(d, d) + spec.b * refl;
      break;
    }
    case TargetKind::neg_eig_diag: {
      if (!(spec.lambda > 0.0)) bad("neg_eig_diag needs lambda > 0");
      phi = Mat::Identity(d, d);
      phi(0, 0) = -spec.lambda;
      break;
    }
    case TargetKind::near_identity: {
      if (!(spec.excess >= 0.0)) bad("near_identity needs a non-negative excess loss");
      std::mt19937_64 rng(spec.seed);
      Mat e = standard_normal(d, d, rng);
      e /= e.norm();
      phi = Mat::Identity(d, d) + std::sqrt(2.0 * spec.excess) * e;
      break;
    }
    case TargetKind::explicit_matrix: {
      if (spec.matrix.size() == 0) bad("explicit target needs a matrix");
      require_square(spec.matrix, "target");
      phi = spec.matrix;
      break;
    }
  }
  require_finite(phi, "target");
  return {phi, min_sym_eigenvalue(phi)};
}

TargetSpec target_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind")) bad("missing 'kind'");
  TargetSpec s;
  try {
    s.kind = parse_target_kind(j.at("kind").get<std::string>());
    s.d = j.value("d", 0);
    s.seed = j.value("seed", std::uint64_t{0});
    s.eigenvalues = j.value("eigenvalues", std::vector<double>{});
    if (j.contains("angles_deg")) {
      for (double deg : j.at("angles_deg").get<std::vector<double>>()) {
        s.angles.push_back(deg * M_PI / 180.0);
      }
    } else {
      s.angles = j.value("angles", std::vector<double>{});
    }
    s.scales = j.value("scales", std::vector<double>{});
    s.a = j.value("a", 1.0);
    s.b = j.value("b", 0.0);
    s.lambda = j.value("lambda", 0.0);
    s.excess = j.value("excess", 0.0);
    if (j.contains("matrix")) {
      s.matrix = matrix_from_json(j.at("matrix"));
      if (s.d == 0) s.d = static_cast<int>(s.matrix.rows());
    }
  } catch (const nlohmann::json::exception& e) {
    bad(e.what());
  }
  return s;
}

nlohmann::json to_json(const TargetSpec& s) {
  nlohmann::json j{{"kind", to_string(s.kind)}, {"d", s.d}, {"seed", s.seed}};
  switch (s.kind) {
    case TargetKind::spd: j["eigenvalues"] = s.eigenvalues; break;
    case TargetKind::rotation:
      j["angles"] = s.angles;
      if (!s.scales.empty()) j["scales"] = s.scales;
      break;
    case TargetKind::partial_reflection: j["a"] = s.a; j["b"] = s.b; break;
    case TargetKind::neg_eig_diag: j["lambda"] = s.lambda; break;
    case TargetKind::near_identity: j["excess"] = s.excess; break;
    case TargetKind::explicit_matrix: j["matrix"] = matrix_to_json(s.matrix); break;
  }
  return j;
}

}  // namespace deeplin
