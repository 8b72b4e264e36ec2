#include "deeplin/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "deeplin/errors.hpp"
#include "deeplin/matrix_io.hpp"

namespace deeplin {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad(const std::string& what) {
  throw Error(ErrorCode::invalid_config, "config: " + what);
}

bool is_trace_check(const std::string& c) {
  return c == "trace_recurrence" || c == "commuting_normal" || c == "eigen_recurrence" ||
         c == "failure_floor";
}

StepSchedule schedule_from_json(const nlohmann::json& j) {
  if (j.is_number()) return StepSchedule::constant(j.get<double>());
  if (!j.is_object()) bad("schedule must be a number or an object");
  StepSchedule s;
  s.mode = parse_step_mode(j.value("mode", std::string("constant")));
  s.eta = j.value("eta", 0.0);
  s.etas = j.value("etas", std::vector<double>{});
  s.c = j.value("c", 3.0);
  return s;
}

std::string resolve(const nlohmann::json& out, const char* key, const fs::path& base) {
  if (!out.contains(key) || out.at(key).is_null()) return {};
  fs::path p = out.at(key).get<std::string>();
  if (p.is_relative() && !base.empty()) p = base / p;
  return p.string();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) return;
  const fs::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  out << text;
}

ExitCode exit_for_error(ErrorCode code) {
  return code == ErrorCode::invalid_config || code == ErrorCode::io ? ExitCode::config_error
                                                                   : ExitCode::numeric_failure;
}

}  // namespace

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names{
      "trace_recurrence", "commuting_normal", "eigen_recurrence",     "failure_floor",
      "fd_gradient",      "fd_hessian",       "gradient_lower_bound", "hessian_upper_bound"};
  return names;
}

TrainerConfig trainer_from_json(const nlohmann::json& j) {
  if (!j.is_object()) bad("'trainer' must be an object");
  TrainerConfig c;
  c.algorithm = parse_algorithm(j.value("algorithm", std::string("gd")));
  c.d = j.value("d", 0);
  c.L = j.value("L", 1);
  if (j.contains("schedule")) c.schedule = schedule_from_json(j.at("schedule"));
  else if (j.contains("eta")) c.schedule = StepSchedule::constant(j.at("eta").get<double>());
  c.gamma = j.value("gamma", 1.0);
  c.psi = j.value("psi", 0.0);
  c.kappa = j.value("kappa", 0.0);
  const auto pm = j.value("penalty_mode", std::string("canonical"));
  if (pm == "canonical") c.penalty_mode = PenaltyMode::canonical;
  else if (pm == "objective") c.penalty_mode = PenaltyMode::objective;
  else bad("unknown penalty_mode '" + pm + "'");
  c.max_iters = j.value("max_iters", 1000);
  c.epsilon = j.value("epsilon", 0.0);
  c.record_spectra = j.value("record_spectra", false);
  c.record_layers = j.value("record_layers", false);
  return c;
}

ScenarioConfig scenario_from_json(const nlohmann::json& j, const fs::path& base_dir) {
  ScenarioConfig cfg;
  try {
    if (!j.is_object()) bad("top level must be an object");
    const int version = j.value("schema_version", -1);
    if (version != kSchemaVersion) {
      bad("schema_version must be " + std::to_string(kSchemaVersion));
    }
    cfg.id = j.value("id", std::string("scenario"));
    if (!j.contains("target")) bad("missing 'target'");
    cfg.target = target_from_json(j.at("target"));
    if (!j.contains("trainer")) bad("missing 'trainer'");
    cfg.trainer = trainer_from_json(j.at("trainer"));
    cfg.checks = j.value("checks", std::vector<std::string>{});
    for (const auto& c : cfg.checks) {
      const auto& k = known_checks();
      if (std::find(k.begin(), k.end(), c) == k.end()) bad("unknown check '" + c + "'");
    }
    if (j.contains("output")) {
      const auto& out = j.at("output");
      cfg.trace_csv = resolve(out, "trace_csv", base_dir);
      cfg.report_json = resolve(out, "report_json", base_dir);
    }
  } catch (const nlohmann::json::exception& e) {
    bad(e.what());
  }
  return cfg;
}

ScenarioConfig load_scenario(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    bad(path.string() + ": " + e.what());
  }
  return scenario_from_json(j, path.parent_path());
}

nlohmann::json to_json(const ScenarioReport& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  nlohmann::json j{{"id", r.id},
                   {"status", r.status},
                   {"terminal", to_string(r.terminal)},
                   {"final_loss", r.final_loss},
                   {"min_loss", r.min_loss},
                   {"iterations", r.iterations},
                   {"margin", r.margin},
                   {"checks", checks},
                   {"wall_seconds", r.wall_seconds},
                   {"exit_code", static_cast<int>(r.exit)}};
  if (!r.warnings.empty()) j["warnings"] = r.warnings;
  if (!r.message.empty()) j["message"] = r.message;
  return j;
}

ScenarioRun run_scenario(const ScenarioConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  ScenarioRun run;
  ScenarioReport& rep = run.report;
  rep.id = cfg.id;

  const Target target = make_target(cfg.target);
  run.phi = target.phi;
  rep.margin = target.margin;

  TrainerConfig tc = cfg.trainer;
  for (const auto& c : cfg.checks) {
    if (c == "eigen_recurrence") tc.record_spectra = true;
    if (c != "trace_recurrence" && c != "failure_floor") tc.record_layers = true;
  }
  run.trace = train(run.phi, tc);
  const TrainingTrace& trace = run.trace;

  rep.terminal = trace.status;
  rep.iterations = trace.iterations();
  rep.final_loss = trace.last().loss;
  rep.min_loss = rep.final_loss;
  for (const auto& r : trace.records) rep.min_loss = std::min(rep.min_loss, r.loss);
  rep.warnings = trace.warnings;
  rep.message = trace.message;
  rep.status = to_string(trace.status);

  if (!cfg.trace_csv.empty()) {
    const fs::path p(cfg.trace_csv);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    write_trace_csv_file(cfg.trace_csv, trace);
  }

  if (trace.status == TerminalStatus::error) {
    rep.status = "error";
    rep.exit = exit_for_error(trace.error_code.value_or(ErrorCode::numeric_failure));
  } else {
    bool floor_ok = false;
    for (const auto& c : cfg.checks) {
      CheckReport cr;
      try {
        if (is_trace_check(c)) {
          if (c == "trace_recurrence") cr = trace_recurrence_check(trace, run.phi);
          else if (c == "commuting_normal")
            cr = check_commuting_normal(trace, run.phi,
                                        tc.algorithm == Algorithm::gd ||
                                            tc.algorithm == Algorithm::penalty_gd);
          else if (c == "eigen_recurrence") cr = eigen_recurrence_check(trace, run.phi);
          else {
            cr = failure_floor_check(trace, run.phi);
            floor_ok = cr.status() == CheckStatus::pass;
          }
        } else {
          const DeepLinearNet net(*trace.last().layers, tc.limits);
          if (c == "fd_gradient") cr = fd_gradient_check(net, run.phi);
          else if (c == "fd_hessian") cr = fd_hessian_check(net, run.phi);
          else if (c == "gradient_lower_bound") cr = check_gradient_lower_bound(net, run.phi);
          else cr = check_hessian_upper_bound(net, run.phi);
        }
      } catch (const Error& e) {
        cr.name = c;
        cr.violations = 1;
        cr.note = std::string("check could not run: ") + e.what();
      }
      rep.checks.push_back(std::move(cr));
    }
    const bool any_fail = std::any_of(rep.checks.begin(), rep.checks.end(),
                                      [](const CheckReport& r) { return !r.passed(); });
    if (any_fail) {
      rep.status = "check-failed";
      rep.exit = ExitCode::check_failure;
    } else if (floor_ok) {
      rep.status = "floor-confirmed";
    } else if (trace.status == TerminalStatus::diverged) {
      rep.exit = ExitCode::numeric_failure;
    }
  }

  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_text(cfg.report_json, to_json(rep).dump(2) + "\n");
  return run;
}

int workers_from_env() {
  const char* v = std::getenv("DEEPLIN_WORKERS");
  if (!v || !*v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1) {
    throw Error(ErrorCode::invalid_config, "DEEPLIN_WORKERS must be a positive integer");
  }
  return static_cast<int>(std::min<long>(n, 256));
}

std::vector<ScenarioReport> run_sweep(const fs::path& dir, int workers) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::io, dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<ScenarioReport> reports(files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < files.size(); i = next++) {
      try {
        reports[i] = run_scenario(load_scenario(files[i])).report;
      } catch (const Error& e) {
        ScenarioReport& r = reports[i];
        r.id = files[i].filename().string();
        r.status = "error";
        r.terminal = TerminalStatus::error;
        r.message = e.what();
        r.exit = exit_for_error(e.code());
      }
    }
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(files.size())));
  std::vector<std::thread> pool;
  for (int k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return reports;
}

}  // namespace deeplin
