#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "deeplin/targets.hpp"
#include "deeplin/trainers.hpp"
#include "deeplin/verify.hpp"

namespace deeplin {

inline constexpr int kSchemaVersion = 1;

// Names accepted in a config's "checks" list.
//   trace checks:   trace_recurrence, commuting_normal, eigen_recurrence, failure_floor
//   iterate checks: fd_gradient, fd_hessian, gradient_lower_bound, hessian_upper_bound
//                   (evaluated on the final iterate)
const std::vector<std::string>& known_checks();

struct ScenarioConfig {
  std::string id;
  TargetSpec target;
  TrainerConfig trainer;
  std::vector<std::string> checks;
  std::string trace_csv;    // empty: not written
  std::string report_json;  // empty: not written
};

// Relative output paths are resolved against `base_dir`.
ScenarioConfig scenario_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ScenarioConfig load_scenario(const std::filesystem::path& path);
TrainerConfig trainer_from_json(const nlohmann::json& j);

enum class ExitCode { ok = 0, check_failure = 1, config_error = 2, numeric_failure = 3 };

struct ScenarioReport {
  std::string id;
  std::string status;  // trainer status, or check-failed / floor-confirmed / error
  TerminalStatus terminal = TerminalStatus::budget;
  double final_loss = 0.0;
  double min_loss = 0.0;
  int iterations = 0;
  double margin = 0.0;  // lambda_min(sym(Phi))
  std::vector<CheckReport> checks;
  std::vector<std::string> warnings;
  std::string message;
  double wall_seconds = 0.0;
  ExitCode exit = ExitCode::ok;
};

nlohmann::json to_json(const ScenarioReport& r);

struct ScenarioRun {
  ScenarioReport report;
  Mat phi;
  TrainingTrace trace;
};

// Trains, writes the trace CSV, runs the requested checks and writes the
// report JSON. Trainer errors end up in the report rather than propagating;
// invalid configs throw Error(invalid_config).
ScenarioRun run_scenario(const ScenarioConfig& cfg);

// Runs every *.json config in `dir` (name order) on a pool of at most
// `workers` threads. Config errors are reported per file.
std::vector<ScenarioReport> run_sweep(const std::filesystem::path& dir, int workers);

// DEEPLIN_WORKERS, default 1.
int workers_from_env();

}  // namespace deeplin
