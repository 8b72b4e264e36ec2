#include "deeplin/trainers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "deeplin/factor.hpp"
#include "deeplin/project.hpp"

namespace deeplin {

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::gd: return "gd";
    case Algorithm::power_projection: return "power_projection";
    case Algorithm::step_and_project: return "step_and_project";
    case Algorithm::penalty_gd: return "penalty_gd";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& s) {
  if (s == "gd") return Algorithm::gd;
  if (s == "power_projection") return Algorithm::power_projection;
  if (s == "step_and_project") return Algorithm::step_and_project;
  if (s == "penalty_gd") return Algorithm::penalty_gd;
  throw Error(ErrorCode::invalid_config, "unknown algorithm '" + s + "'");
}

const char* to_string(StepMode m) {
  switch (m) {
    case StepMode::constant: return "constant";
    case StepMode::sequence: return "sequence";
    case StepMode::admissible: return "admissible";
    case StepMode::spectral: return "spectral";
    case StepMode::frobenius: return "frobenius";
  }
  return "unknown";
}

StepMode parse_step_mode(const std::string& s) {
  if (s == "constant") return StepMode::constant;
  if (s == "sequence") return StepMode::sequence;
  if (s == "admissible") return StepMode::admissible;
  if (s == "spectral") return StepMode::spectral;
  if (s == "frobenius") return StepMode::frobenius;
  throw Error(ErrorCode::invalid_config, "unknown step mode '" + s + "'");
}

const char* to_string(TerminalStatus s) {
  switch (s) {
    case TerminalStatus::converged: return "converged";
    case TerminalStatus::budget: return "budget";
    case TerminalStatus::diverged: return "diverged";
    case TerminalStatus::error: return "error";
  }
  return "unknown";
}

double admissible_step(double r, int L, int d, double phi_op_norm) {
  const double m = std::max(std::pow(1.0 + r, 2.0 * L), phi_op_norm * phi_op_norm);
  return 1.0 / (3.0 * L * std::pow(static_cast<double>(d), 5) * m);
}

std::vector<Mat> gradient_step(const DeepLinearNet& net, const Mat& phi, double eta) {
  const GradientSet g = full_gradient(net, phi);
  std::vector<Mat> out;
  out.reserve(net.depth());
  for (int i = 0; i < net.depth(); ++i) out.push_back(net.layer(i) - eta * g.per_layer[i]);
  return out;
}

namespace {

struct StepOutcome {
  std::vector<Mat> layers;
  double eta = 0.0;
  std::optional<double> loss_half;
  // Loss of the new iterate when it is known more directly than from the
  // layer product (power projection reports the projected point).
  std::optional<double> loss;
};

using StepFn = std::function<StepOutcome(const DeepLinearNet&, int t, double radius)>;

struct LayerStats {
  double dev = 0.0;       // max_i ||Theta_i - I||_2
  double min_sv = 0.0;
  double max_norm = 0.0;
};

LayerStats layer_stats(const DeepLinearNet& net) {
  LayerStats s;
  s.min_sv = std::numeric_limits<double>::infinity();
  const Mat eye = Mat::Identity(net.dim(), net.dim());
  for (const auto& layer : net.layers()) {
    Eigen::JacobiSVD<Mat> svd(layer);
    const Vec& sv = svd.singularValues();
    s.max_norm = std::max(s.max_norm, sv(0));
    s.min_sv = std::min(s.min_sv, sv(sv.size() - 1));
    s.dev = std::max(s.dev, op_norm(layer - eye));
  }
  return s;
}

double step_size(const StepSchedule& sched, int t, int L, int d, const Mat& phi) {
  switch (sched.mode) {
    case StepMode::constant:
      return sched.eta;
    case StepMode::sequence:
      return sched.etas[std::min<std::size_t>(t, sched.etas.size() - 1)];
    case StepMode::spectral: {
      const double s = op_norm(phi);
      return 1.0 / (L * (1.0 + s * s));
    }
    case StepMode::frobenius:
      return 1.0 / (sched.c * L * std::pow(static_cast<double>(d), 5) * phi.squaredNorm());
    case StepMode::admissible:
      break;
  }
  throw Error(ErrorCode::invalid_config, "step mode has no fixed value");
}

void validate(const Mat& phi, const TrainerConfig& cfg, Algorithm expected) {
  require_square(phi, "trainer");
  require_finite(phi, "trainer");
  if (cfg.algorithm != expected) {
    throw Error(ErrorCode::invalid_config,
                std::string("trainer: config is tagged ") + to_string(cfg.algorithm) +
                    ", expected " + to_string(expected));
  }
  if (cfg.d != 0 && cfg.d != phi.rows()) {
    throw Error(ErrorCode::invalid_config, "trainer: config d does not match target dimension");
  }
  if (cfg.L < 1) throw Error(ErrorCode::invalid_config, "trainer: L must be >= 1");
  if (cfg.max_iters < 0) throw Error(ErrorCode::invalid_config, "trainer: max_iters must be >= 0");
  const auto& s = cfg.schedule;
  // The penalty template admits any step sizes, including a pure pull to I.
  const bool zero_ok = expected == Algorithm::penalty_gd;
  if (s.mode == StepMode::constant && !(s.eta > 0.0 || (zero_ok && s.eta == 0.0))) {
    throw Error(ErrorCode::invalid_config, "trainer: constant step size must be positive");
  }
  if (s.mode == StepMode::sequence) {
    if (s.etas.empty()) throw Error(ErrorCode::invalid_config, "trainer: empty step sequence");
    for (double e : s.etas) {
      if (!(e > 0.0)) throw Error(ErrorCode::invalid_config, "trainer: step sizes must be positive");
    }
  }
  if (s.mode == StepMode::frobenius && !(s.c > 0.0)) {
    throw Error(ErrorCode::invalid_config, "trainer: frobenius step constant must be positive");
  }
  if (s.mode == StepMode::admissible && expected != Algorithm::gd) {
    throw Error(ErrorCode::invalid_config, "trainer: admissible step rule applies to gd only");
  }
}

TrainingTrace run_loop(const Mat& phi, const TrainerConfig& cfg, DeepLinearNet net,
                       const StepFn& step) {
  TrainingTrace trace;
  trace.algorithm = cfg.algorithm;
  trace.d = static_cast<int>(phi.rows());
  trace.L = cfg.L;
  trace.gamma = cfg.gamma;
  trace.psi = cfg.psi;
  trace.kappa = cfg.kappa;
  trace.phi_op_norm = op_norm(phi);
  trace.phi_frob_norm = phi.norm();
  const double u_floor = std::pow(trace.phi_op_norm, 1.0 / cfg.L);

  double radius = 0.0;
  double u_run = 0.0;
  auto make_record = [&](int t, const DeepLinearNet& n, double loss_value,
                         std::optional<double> loss_half) {
    const LayerStats s = layer_stats(n);
    radius = std::max(radius, s.dev);
    u_run = std::max(u_run, s.max_norm);
    TraceRecord r;
    r.t = t;
    r.loss = loss_value;
    r.loss_half = loss_half;
    r.radius = radius;
    r.min_sv = s.min_sv;
    r.max_norm = s.max_norm;
    r.u_bound = std::max(u_run, u_floor);
    if (cfg.record_spectra) r.eigenvalues = sorted_eigenvalues(n.product());
    if (cfg.record_layers) r.layers = std::vector<Mat>(n.layers().begin(), n.layers().end());
    return r;
  };

  trace.records.push_back(make_record(0, net, loss(net, phi).loss, std::nullopt));
  try {
    for (int t = 0;; ++t) {
      const double current = trace.records.back().loss;
      if (current <= cfg.epsilon) {
        trace.status = TerminalStatus::converged;
        break;
      }
      if (t >= cfg.max_iters) {
        trace.status = TerminalStatus::budget;
        break;
      }
      StepOutcome out = step(net, t, radius);
      bool finite = std::isfinite(out.eta);
      for (const auto& m : out.layers) finite = finite && m.allFinite();
      if (!finite) {
        trace.status = TerminalStatus::diverged;
        trace.message = "non-finite iterate at step " + std::to_string(t + 1);
        break;
      }
      DeepLinearNet next(std::move(out.layers), cfg.limits);
      const double next_loss = out.loss ? *out.loss : loss(next, phi).loss;
      if (!std::isfinite(next_loss)) {
        trace.status = TerminalStatus::diverged;
        trace.message = "non-finite loss at step " + std::to_string(t + 1);
        break;
      }
      trace.step_sizes.push_back(out.eta);
      trace.records.push_back(make_record(t + 1, next, next_loss, out.loss_half));
      net = std::move(next);
      if (next_loss > kDivergenceLoss) {
        trace.status = TerminalStatus::diverged;
        trace.message = "loss exceeded divergence threshold";
        break;
      }
    }
  } catch (const Error& e) {
    trace.status = TerminalStatus::error;
    trace.error_code = e.code();
    trace.message = e.what();
    if (e.condition()) trace.message += " (condition estimate " + std::to_string(*e.condition()) + ")";
  }
  return trace;
}

}  // namespace

TrainingTrace run_gd(const Mat& phi, const TrainerConfig& cfg) {
  validate(phi, cfg, Algorithm::gd);
  const int d = static_cast<int>(phi.rows()), L = cfg.L;
  const double phi_norm = op_norm(phi);
  auto step = [&](const DeepLinearNet& net, int t, double radius) {
    StepOutcome out;
    if (cfg.schedule.mode != StepMode::admissible) {
      out.eta = step_size(cfg.schedule, t, L, d, phi);
      out.layers = gradient_step(net, phi, out.eta);
      return out;
    }
    // The bound depends on the radius after the step, so shrink eta until
    // the candidate step satisfies it.
    const Mat eye = Mat::Identity(d, d);
    double eta = admissible_step(radius, L, d, phi_norm);
    for (int attempt = 0; attempt < 64; ++attempt) {
      out.layers = gradient_step(net, phi, eta);
      double next_radius = radius;
      for (const auto& m : out.layers) next_radius = std::max(next_radius, op_norm(m - eye));
      const double bound = admissible_step(next_radius, L, d, phi_norm);
      if (eta <= bound) break;
      eta = bound;
    }
    out.eta = eta;
    return out;
  };
  return run_loop(phi, cfg, DeepLinearNet::identity(d, L, 1.0, cfg.limits), step);
}

TrainingTrace run_power_projection(const Mat& phi, const TrainerConfig& cfg) {
  validate(phi, cfg, Algorithm::power_projection);
  const GammaPositiveSet set(cfg.gamma);
  const int d = static_cast<int>(phi.rows()), L = cfg.L;
  auto step = [&](const DeepLinearNet& net, int t, double) {
    StepOutcome out;
    out.eta = step_size(cfg.schedule, t, L, d, phi);
    const DeepLinearNet half(gradient_step(net, phi, out.eta), cfg.limits);
    const Mat half_product = half.product();
    out.loss_half = 0.5 * (half_product - phi).squaredNorm();
    const Mat projected = project_gamma_positive(half_product, set.gamma());
    out.loss = 0.5 * (projected - phi).squaredNorm();
    FactorizationResult fr = balanced_factorization(projected, L);
    // The net multiplies Theta_L ... Theta_1, the factorization A_1 ... A_L.
    out.layers.assign(fr.factors.rbegin(), fr.factors.rend());
    return out;
  };
  const double init = std::pow(cfg.gamma, 1.0 / L);
  TrainingTrace trace =
      run_loop(phi, cfg, DeepLinearNet::identity(d, L, init, cfg.limits), step);
  if (!set.contains(phi, 0.0)) {
    trace.warnings.push_back("target is not gamma-positive for gamma = " +
                             std::to_string(cfg.gamma) + "; convergence is not guaranteed");
  }
  return trace;
}

TrainingTrace run_step_and_project(const Mat& phi, const TrainerConfig& cfg) {
  validate(phi, cfg, Algorithm::step_and_project);
  if (!(cfg.psi >= 0.0)) throw Error(ErrorCode::invalid_config, "step_and_project: psi must be >= 0");
  if (!(cfg.gamma >= 0.0)) throw Error(ErrorCode::invalid_config, "step_and_project: gamma must be >= 0");
  const int d = static_cast<int>(phi.rows()), L = cfg.L;
  const IdentityBall ball{cfg.psi, false};
  auto step = [&](const DeepLinearNet& net, int t, double) {
    StepOutcome out;
    out.eta = step_size(cfg.schedule, t, L, d, phi);
    out.layers = gradient_step(net, phi, out.eta);
    for (auto& m : out.layers) m = project_identity_ball(m, ball);
    return out;
  };
  const double init = std::pow(cfg.gamma, 1.0 / L);
  return run_loop(phi, cfg, DeepLinearNet::identity(d, L, init, cfg.limits), step);
}

TrainingTrace run_penalty_gd(const Mat& phi, const TrainerConfig& cfg) {
  validate(phi, cfg, Algorithm::penalty_gd);
  if (!(cfg.kappa >= 0.0 && cfg.kappa <= 1.0)) {
    throw Error(ErrorCode::invalid_config, "penalty_gd: kappa must lie in [0, 1]");
  }
  const int d = static_cast<int>(phi.rows()), L = cfg.L;
  const Mat eye = Mat::Identity(d, d);
  auto step = [&](const DeepLinearNet& net, int t, double) {
    StepOutcome out;
    out.eta = step_size(cfg.schedule, t, L, d, phi);
    const GradientSet g = full_gradient(net, phi);
    out.layers.reserve(L);
    for (int i = 0; i < L; ++i) {
      const Mat& theta = net.layer(i);
      if (cfg.penalty_mode == PenaltyMode::canonical) {
        out.layers.push_back((1.0 - cfg.kappa) * theta + cfg.kappa * eye - out.eta * g.per_layer[i]);
      } else {
        out.layers.push_back(theta - out.eta * (g.per_layer[i] + cfg.kappa * (theta - eye)));
      }
    }
    return out;
  };
  return run_loop(phi, cfg, DeepLinearNet::identity(d, L, 1.0, cfg.limits), step);
}

TrainingTrace train(const Mat& phi, const TrainerConfig& cfg) {
  switch (cfg.algorithm) {
    case Algorithm::gd: return run_gd(phi, cfg);
    case Algorithm::power_projection: return run_power_projection(phi, cfg);
    case Algorithm::step_and_project: return run_step_and_project(phi, cfg);
    case Algorithm::penalty_gd: return run_penalty_gd(phi, cfg);
  }
  throw Error(ErrorCode::invalid_config, "train: unknown algorithm");
}

}  // namespace deeplin
