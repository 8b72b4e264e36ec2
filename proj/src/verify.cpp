#include "deeplin/verify.hpp"

#include <algorithm>
#include <cmath>

namespace deeplin {

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::skipped: return "skipped";
  }
  return "unknown";
}

CheckStatus CheckReport::status() const noexcept {
  if (violations > 0) return CheckStatus::fail;
  if (instances == 0 && skipped > 0) return CheckStatus::skipped;
  return CheckStatus::pass;
}

void CheckReport::merge(const CheckReport& other) {
  instances += other.instances;
  violations += other.violations;
  skipped += other.skipped;
  for (const auto& [k, v] : other.breakdown) breakdown[k] += v;
  if (other.worst && (!worst || other.worst->slack < worst->slack)) worst = other.worst;
  worst_metric = std::max(worst_metric, other.worst_metric);
}

nlohmann::json matrix_to_json(const Mat& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) {
    throw Error(ErrorCode::invalid_config, "matrix must be a non-empty array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!j[i].is_array() || static_cast<Eigen::Index>(j[i].size()) != cols) {
      throw Error(ErrorCode::invalid_config, "matrix rows differ in length");
    }
    for (Eigen::Index k = 0; k < cols; ++k) {
      if (!j[i][k].is_number()) throw Error(ErrorCode::invalid_config, "matrix entry is not a number");
      m(i, k) = j[i][k].get<double>();
    }
  }
  return m;
}

nlohmann::json net_to_json(const DeepLinearNet& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : net.layers()) layers.push_back(matrix_to_json(l));
  return layers;
}

nlohmann::json to_json(const CheckReport& r) {
  nlohmann::json j;
  j["check"] = r.name;
  j["status"] = to_string(r.status());
  j["instances"] = r.instances;
  j["violations"] = r.violations;
  j["skipped"] = r.skipped;
  j["worst_metric"] = r.worst_metric;
  if (!r.breakdown.empty()) j["breakdown"] = r.breakdown;
  if (!r.note.empty()) j["note"] = r.note;
  if (r.worst) {
    j["witness"] = {{"relation", r.worst->relation},
                    {"lhs", r.worst->lhs},
                    {"rhs", r.worst->rhs},
                    {"slack", r.worst->slack},
                    {"inputs", r.worst->inputs}};
  }
  return j;
}

namespace {

// Accumulates "lhs <= rhs (+ allowance)" relations into a report and keeps
// the tightest failing instance as the witness.
class Tally {
 public:
  explicit Tally(CheckReport& report) : report_(report) {}

  bool expect_le(const std::string& relation, double lhs, double rhs, double allowance,
                 const std::function<nlohmann::json()>& inputs) {
    ++report_.instances;
    const double slack = rhs - lhs;
    const bool ok = lhs <= rhs + allowance;
    if (!ok) {
      ++report_.violations;
      ++report_.breakdown[relation];
      if (!report_.worst || slack < report_.worst->slack) {
        report_.worst = Witness{relation, inputs(), lhs, rhs, slack};
      }
    }
    return ok;
  }

 private:
  CheckReport& report_;
};

nlohmann::json instance_inputs(const DeepLinearNet& net, const Mat& phi) {
  return {{"layers", net_to_json(net)}, {"phi", matrix_to_json(phi)}};
}

double loss_at(const std::vector<Mat>& layers, const Mat& phi) {
  Mat p = Mat::Identity(phi.rows(), phi.cols());
  for (const auto& l : layers) p = l * p;
  return 0.5 * (p - phi).squaredNorm();
}

bool is_symmetric(const Mat& m) {
  return (m - m.transpose()).norm() <= scaled_tol(1e-12, m.norm());
}

void require_step(double h) {
  if (!(h > 1e-8 && h < 1e-2)) {
    throw Error(ErrorCode::invalid_config, "finite-difference step must lie in (1e-8, 1e-2)");
  }
}

}  // namespace

CheckReport fd_gradient_check(const DeepLinearNet& net, const Mat& phi, double h, double tol,
                              const GradientFn& gradient) {
  require_step(h);
  CheckReport report;
  report.name = "fd_gradient";
  Tally tally(report);
  const GradientSet g = gradient ? gradient(net, phi) : full_gradient(net, phi);
  std::vector<Mat> layers(net.layers().begin(), net.layers().end());
  const int d = net.dim();
  for (int i = 0; i < net.depth(); ++i) {
    for (int k = 0; k < d * d; ++k) {
      const double saved = layers[i].data()[k];
      layers[i].data()[k] = saved + h;
      const double up = loss_at(layers, phi);
      layers[i].data()[k] = saved - h;
      const double down = loss_at(layers, phi);
      layers[i].data()[k] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double an = g.per_layer[i].data()[k];
      const double err = std::abs(fd - an) / std::max(1.0, std::abs(an));
      report.worst_metric = std::max(report.worst_metric, err);
      tally.expect_le("relative_error", err, tol, 0.0, [&] {
        auto j = instance_inputs(net, phi);
        j["layer"] = i;
        j["vec_index"] = k;
        j["h"] = h;
        j["analytic"] = an;
        j["finite_difference"] = fd;
        return j;
      });
    }
  }
  return report;
}

CheckReport fd_hessian_check(const DeepLinearNet& net, const Mat& phi, double h, double tol) {
  require_step(h);
  CheckReport report;
  report.name = "fd_hessian";
  Tally tally(report);
  const Mat hess = full_hessian(net, phi);
  const int d = net.dim(), n = d * d, side = net.depth() * n;
  std::vector<Mat> layers(net.layers().begin(), net.layers().end());
  auto coord = [&](int p) -> double& { return layers[p / n].data()[p % n]; };
  const double base = loss_at(layers, phi);

  for (int p = 0; p < side; ++p) {
    for (int q = p; q < side; ++q) {
      double fd;
      if (p == q) {
        const double saved = coord(p);
        coord(p) = saved + h;
        const double up = loss_at(layers, phi);
        coord(p) = saved - h;
        const double down = loss_at(layers, phi);
        coord(p) = saved;
        fd = (up - 2.0 * base + down) / (h * h);
      } else {
        const double sp = coord(p), sq = coord(q);
        auto eval = [&](double dp, double dq) {
          coord(p) = sp + dp;
          coord(q) = sq + dq;
          const double v = loss_at(layers, phi);
          coord(p) = sp;
          coord(q) = sq;
          return v;
        };
        fd = (eval(h, h) - eval(h, -h) - eval(-h, h) + eval(-h, -h)) / (4.0 * h * h);
      }
      for (const auto& [r, c] : {std::pair{p, q}, std::pair{q, p}}) {
        if (r == c && r != p) continue;
        const double err = std::abs(hess(r, c) - fd);
        report.worst_metric = std::max(report.worst_metric, err);
        tally.expect_le("entry_error", err, tol, 0.0, [&] {
          auto j = instance_inputs(net, phi);
          j["row"] = r;
          j["col"] = c;
          j["h"] = h;
          j["analytic"] = hess(r, c);
          j["finite_difference"] = fd;
          return j;
        });
        if (p == q) break;
      }
    }
  }
  const double asym = (hess - hess.transpose()).norm();
  tally.expect_le("symmetry", asym, 1e-10 * hess.norm(), 0.0,
                  [&] { return instance_inputs(net, phi); });
  return report;
}

CheckReport check_gradient_lower_bound(const DeepLinearNet& net, const Mat& phi,
                                       LossConvention convention) {
  CheckReport report;
  report.name = "gradient_lower_bound";
  double min_sv = std::numeric_limits<double>::infinity();
  for (const auto& l : net.layers()) min_sv = std::min(min_sv, sigma_min(l));
  // a is a radius; when every sigma_min exceeds 1 the tightest admissible a is 0.
  const double a = std::max(0.0, 1.0 - min_sv);
  if (!(a < 1.0)) {
    ++report.skipped;
    report.note = "precondition a < 1 fails";
    return report;
  }
  const int L = net.depth();
  const LossReport lr = loss(net, phi);
  const double scale = convention == LossConvention::unhalved ? 2.0 : 1.0;
  const double value = scale * lr.loss;
  const double grad_sq = scale * scale * full_gradient(net, phi, lr.residual).squared_norm();
  const double bound = 4.0 * value * L * std::pow(1.0 - a, 2.0 * L);
  report.worst_metric = bound > 0.0 ? bound / std::max(grad_sq, kAbsFloor) : 0.0;
  Tally tally(report);
  // rhs <= lhs form: bound <= ||grad||^2.
  tally.expect_le("gradient_norm", bound, grad_sq, kBoundSlack, [&] {
    auto j = instance_inputs(net, phi);
    j["a"] = a;
    j["convention"] = convention == LossConvention::unhalved ? "unhalved" : "halved";
    return j;
  });
  return report;
}

CheckReport check_hessian_upper_bound(const DeepLinearNet& net, const Mat& phi) {
  CheckReport report;
  report.name = "hessian_upper_bound";
  double max_norm = 0.0;
  for (const auto& l : net.layers()) max_norm = std::max(max_norm, op_norm(l));
  const double z = std::max(0.0, max_norm - 1.0);
  const int L = net.depth(), d = net.dim();
  if (op_norm(phi) > std::pow(1.0 + z, L)) {
    ++report.skipped;
    report.note = "precondition ||Phi||_2 <= (1+z)^L fails";
    return report;
  }
  const double hn = full_hessian(net, phi).norm();
  const double bound = 3.0 * L * std::pow(static_cast<double>(d), 5) * std::pow(1.0 + z, 2.0 * L);
  report.worst_metric = hn / bound;
  Tally tally(report);
  tally.expect_le("hessian_frobenius", hn, bound, kBoundSlack, [&] {
    auto j = instance_inputs(net, phi);
    j["z"] = z;
    return j;
  });
  return report;
}

CheckReport check_commuting_normal(const TrainingTrace& trace, const Mat& phi, bool equal_layers,
                                   double tol) {
  CheckReport report;
  report.name = "commuting_normal";
  if (!is_symmetric(phi)) {
    ++report.skipped;
    report.note = "target is not symmetric";
    return report;
  }
  Tally tally(report);
  for (const auto& rec : trace.records) {
    if (!rec.layers) {
      ++report.skipped;
      continue;
    }
    const auto& layers = *rec.layers;
    auto inputs = [&] {
      nlohmann::json j;
      j["t"] = rec.t;
      j["phi"] = matrix_to_json(phi);
      nlohmann::json ls = nlohmann::json::array();
      for (const auto& l : layers) ls.push_back(matrix_to_json(l));
      j["layers"] = ls;
      return j;
    };
    if (equal_layers) {
      double spread = 0.0;
      for (const auto& l : layers) spread = std::max(spread, (l - layers.front()).norm());
      report.worst_metric = std::max(report.worst_metric, spread);
      tally.expect_le("equal_layers", spread, tol, 0.0, inputs);
    }
    Mat p = Mat::Identity(phi.rows(), phi.cols());
    for (const auto& l : layers) p = l * p;
    const double comm = (p * phi - phi * p).norm();
    const double scale = std::max(1.0, p.norm() * phi.norm());
    report.worst_metric = std::max(report.worst_metric, comm / scale);
    tally.expect_le("commutator", comm, tol * scale, 0.0, inputs);
  }
  if (report.instances == 0) report.note = "trace has no recorded layers";
  return report;
}

CheckReport eigen_recurrence_check(const TrainingTrace& trace, const Mat& phi, double tol) {
  CheckReport report;
  report.name = "eigen_recurrence";
  if (trace.algorithm != Algorithm::gd) {
    throw Error(ErrorCode::invalid_config, "eigen_recurrence_check: needs a gd trace");
  }
  if (!is_symmetric(phi)) {
    throw Error(ErrorCode::invalid_config, "eigen_recurrence_check: target must be symmetric");
  }
  for (const auto& rec : trace.records) {
    if (!rec.eigenvalues || !rec.layers) {
      throw Error(ErrorCode::invalid_config,
                  "eigen_recurrence_check: trace is missing spectra or layers");
    }
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(sym(phi));
  const Vec& mu = es.eigenvalues();
  const Mat& basis = es.eigenvectors();
  const int L = trace.L;
  const Eigen::Index d = mu.size();

  Tally tally(report);
  Vec lam = Vec::Ones(d);
  for (std::size_t s = 0; s < trace.records.size(); ++s) {
    const auto& rec = trace.records[s];
    if (s > 0) {
      const double eta = trace.step_sizes[s - 1];
      for (Eigen::Index k = 0; k < d; ++k) {
        const double x = lam(k);
        lam(k) = x + eta * std::pow(x, L - 1) * (mu(k) - std::pow(x, L));
      }
    }
    auto inputs = [&] {
      nlohmann::json j;
      j["t"] = rec.t;
      j["phi"] = matrix_to_json(phi);
      j["simulated"] = std::vector<double>(lam.data(), lam.data() + d);
      j["layer0"] = matrix_to_json(rec.layers->front());
      return j;
    };
    const Mat diag = basis.transpose() * rec.layers->front() * basis;
    Vec sim_power(d);
    for (Eigen::Index k = 0; k < d; ++k) {
      const double err = std::abs(diag(k, k) - lam(k));
      report.worst_metric = std::max(report.worst_metric, err);
      tally.expect_le("layer_eigenvalue", err, tol, 0.0, inputs);
      sim_power(k) = std::pow(lam(k), L);
      if (mu(k) > 0.0) {
        const double target = std::pow(mu(k), 1.0 / L);
        const double lo = std::min(1.0, target), hi = std::max(1.0, target);
        const double outside = std::max({lo - lam(k), lam(k) - hi, lo - diag(k, k), diag(k, k) - hi});
        tally.expect_le("bracketing", outside, 0.0, kBoundSlack, inputs);
      }
    }
    std::sort(sim_power.data(), sim_power.data() + d);
    const CVec& ev = *rec.eigenvalues;
    for (Eigen::Index k = 0; k < d; ++k) {
      const double err = std::abs(ev(k) - std::complex<double>(sim_power(k), 0.0));
      report.worst_metric = std::max(report.worst_metric, err);
      tally.expect_le("product_eigenvalue", err, tol, 0.0, inputs);
    }
  }
  return report;
}

CheckReport trace_recurrence_check(const TrainingTrace& trace, const Mat& phi) {
  CheckReport report;
  report.name = "trace_recurrence";
  Tally tally(report);
  const int L = trace.L, d = trace.d;
  const auto& recs = trace.records;
  auto inputs = [&](std::size_t t) {
    return [&, t] {
      nlohmann::json j;
      j["t"] = recs[t].t;
      j["eta"] = trace.step_sizes[t];
      j["loss_t"] = recs[t].loss;
      j["loss_next"] = recs[t + 1].loss;
      j["radius_t"] = recs[t].radius;
      j["radius_next"] = recs[t + 1].radius;
      j["phi"] = matrix_to_json(phi);
      return j;
    };
  };

  if (trace.algorithm == Algorithm::gd) {
    for (std::size_t t = 0; t + 1 < recs.size(); ++t) {
      const double eta = trace.step_sizes[t];
      const double r = recs[t].radius, r_next = recs[t + 1].radius;
      const double radius_rhs = r + eta * std::pow(1.0 + r, L) * std::sqrt(2.0 * recs[t].loss);
      tally.expect_le("radius_growth", r_next, radius_rhs, kBoundSlack, inputs(t));
      if (eta <= admissible_step(r_next, L, d, trace.phi_op_norm)) {
        const double factor = 1.0 - 2.0 * eta * L * std::pow(1.0 - r, 2.0 * L);
        if (recs[t].loss > 0.0) {
          report.worst_metric = std::max(report.worst_metric, recs[t + 1].loss / (factor * recs[t].loss));
        }
        tally.expect_le("loss_contraction", recs[t + 1].loss, factor * recs[t].loss, kBoundSlack,
                        inputs(t));
      } else {
        ++report.skipped;
      }
    }
  } else if (trace.algorithm == Algorithm::power_projection) {
    const double gamma = trace.gamma;
    const double sv_floor = std::pow(gamma, 1.0 / L);
    for (std::size_t t = 0; t < recs.size(); ++t) {
      const auto& rec = recs[t];
      auto rec_inputs = [&] {
        nlohmann::json j;
        j["t"] = rec.t;
        j["loss"] = rec.loss;
        j["min_sv"] = rec.min_sv;
        j["u_bound"] = rec.u_bound;
        j["phi"] = matrix_to_json(phi);
        return j;
      };
      tally.expect_le("sigma_min_floor", sv_floor, rec.min_sv, 1e-9, rec_inputs);
      // ||Theta_{1:L} - Phi||_F = sqrt(2 l) under the halved loss.
      const double u_rhs = std::pow(std::sqrt(2.0 * rec.loss) + trace.phi_frob_norm, 1.0 / L);
      tally.expect_le("u_bound", rec.u_bound, u_rhs, 1e-9, rec_inputs);
      if (t + 1 == recs.size()) break;
      const auto& next = recs[t + 1];
      const double eta = trace.step_sizes[t];
      const double half = next.loss_half.value_or(std::numeric_limits<double>::quiet_NaN());
      tally.expect_le("projection_monotone", next.loss, half, kBoundSlack, inputs(t));
      const double factor = 1.0 - eta * L * gamma * gamma;
      if (rec.loss > 0.0) {
        report.worst_metric = std::max(report.worst_metric, half / (factor * rec.loss));
      }
      tally.expect_le("half_step_contraction", half, factor * rec.loss, kBoundSlack, inputs(t));
    }
  } else {
    report.note = std::string("no recurrences defined for ") + to_string(trace.algorithm);
    ++report.skipped;
  }
  return report;
}

double failure_floor(const Mat& phi) {
  Eigen::SelfAdjointEigenSolver<Mat> es(sym(phi), Eigen::EigenvaluesOnly);
  double floor = 0.0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    const double mu = es.eigenvalues()(k);
    if (mu < 0.0) floor += 0.5 * mu * mu;
  }
  return floor;
}

CheckReport failure_floor_check(const TrainingTrace& trace, const Mat& phi) {
  CheckReport report;
  report.name = "failure_floor";
  if (!is_symmetric(phi)) {
    ++report.skipped;
    report.note = "target is not symmetric";
    return report;
  }
  const double floor = failure_floor(phi);
  Tally tally(report);
  double min_loss = std::numeric_limits<double>::infinity();
  for (const auto& rec : trace.records) {
    min_loss = std::min(min_loss, rec.loss);
    tally.expect_le("loss_floor", floor, rec.loss, kBoundSlack, [&] {
      nlohmann::json j;
      j["t"] = rec.t;
      j["loss"] = rec.loss;
      j["floor"] = floor;
      j["phi"] = matrix_to_json(phi);
      return j;
    });
  }
  report.worst_metric = min_loss;
  report.note = "floor " + std::to_string(floor);
  return report;
}

}  // namespace deeplin
