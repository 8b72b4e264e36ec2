#pragma once

#include <optional>
#include <string>
#include <vector>

#include "deeplin/matcore.hpp"
#include "deeplin/network.hpp"

namespace deeplin {

enum class Algorithm { gd, power_projection, step_and_project, penalty_gd };

const char* to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& s);

enum class StepMode {
  constant,    // eta
  sequence,    // etas[t], holding the last entry once exhausted
  admissible,  // largest eta with eta <= 1/(3 L d^5 max{(1+R(t+1))^{2L}, ||Phi||_2^2}),
               // re-evaluated every iteration (gd only)
  spectral,    // 1 / (L (1 + ||Phi||_2^2))
  frobenius,   // 1 / (c L d^5 ||Phi||_F^2)
};

const char* to_string(StepMode m);
StepMode parse_step_mode(const std::string& s);

struct StepSchedule {
  StepMode mode = StepMode::constant;
  double eta = 0.0;
  std::vector<double> etas;
  double c = 3.0;

  static StepSchedule constant(double eta) { return {StepMode::constant, eta, {}, 3.0}; }
  static StepSchedule sequence(std::vector<double> etas) {
    return {StepMode::sequence, 0.0, std::move(etas), 3.0};
  }
  static StepSchedule of(StepMode mode, double c = 3.0) { return {mode, 0.0, {}, c}; }
};

enum class PenaltyMode {
  canonical,  // Theta_i <- (1 - kappa) Theta_i + kappa I - eta_t G_i
  objective,  // plain gd on loss + kappa/2 sum_i ||I - Theta_i||_F^2
};

struct TrainerConfig {
  Algorithm algorithm = Algorithm::gd;
  int d = 0;  // 0: take the dimension from the target
  int L = 1;
  StepSchedule schedule;
  double gamma = 1.0;
  double psi = 0.0;
  double kappa = 0.0;
  PenaltyMode penalty_mode = PenaltyMode::canonical;
  int max_iters = 1000;
  double epsilon = 0.0;
  bool record_spectra = false;
  // Keep a copy of every iterate's layers; the structural checkers need them.
  bool record_layers = false;
  SizeLimits limits;
};

enum class TerminalStatus { converged, budget, diverged, error };

const char* to_string(TerminalStatus s);

struct TraceRecord {
  int t = 0;
  double loss = 0.0;
  std::optional<double> loss_half;  // loss of the gradient half-step (power projection)
  double radius = 0.0;              // R(t), running max of max_i ||Theta_i - I||_2
  double min_sv = 0.0;              // min_i sigma_min(Theta_i)
  double max_norm = 0.0;            // max_i ||Theta_i||_2
  double u_bound = 0.0;             // U(t)
  std::optional<CVec> eigenvalues;  // of Theta_{1:L}, sorted
  std::optional<std::vector<Mat>> layers;
};

struct TrainingTrace {
  Algorithm algorithm = Algorithm::gd;
  int d = 0;
  int L = 0;
  double gamma = 0.0;
  double psi = 0.0;
  double kappa = 0.0;
  double phi_op_norm = 0.0;
  double phi_frob_norm = 0.0;
  std::vector<TraceRecord> records;
  std::vector<double> step_sizes;  // step_sizes[t] moved iterate t to t + 1
  TerminalStatus status = TerminalStatus::budget;
  std::optional<ErrorCode> error_code;
  std::string message;
  std::vector<std::string> warnings;

  int iterations() const { return static_cast<int>(records.size()) - 1; }
  const TraceRecord& last() const { return records.back(); }
};

inline constexpr double kDivergenceLoss = 1e12;

TrainingTrace run_gd(const Mat& phi, const TrainerConfig& cfg);
TrainingTrace run_power_projection(const Mat& phi, const TrainerConfig& cfg);
TrainingTrace run_step_and_project(const Mat& phi, const TrainerConfig& cfg);
TrainingTrace run_penalty_gd(const Mat& phi, const TrainerConfig& cfg);

// Dispatch on cfg.algorithm.
TrainingTrace train(const Mat& phi, const TrainerConfig& cfg);

// Right-hand side of the gd step-size admissibility condition at radius r.
double admissible_step(double r, int L, int d, double phi_op_norm);

// Simultaneous gradient step: every layer moves using the pre-step iterate.
std::vector<Mat> gradient_step(const DeepLinearNet& net, const Mat& phi, double eta);

}  // namespace deeplin
