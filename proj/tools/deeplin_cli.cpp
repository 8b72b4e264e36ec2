// Command-line surface: run, sweep, verify, factor.
#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "deeplin/acceptance.hpp"
#include "deeplin/errors.hpp"
#include "deeplin/factor.hpp"
#include "deeplin/matrix_io.hpp"
#include "deeplin/scenario.hpp"

namespace {

using deeplin::ExitCode;

int code(ExitCode e) { return static_cast<int>(e); }

int exit_for(const deeplin::Error& e) {
  return code(e.is_config() ? ExitCode::config_error : ExitCode::numeric_failure);
}

void print_report(const deeplin::ScenarioReport& r) {
  std::printf("%s: %s, %d iterations, final loss %.6e\n", r.id.c_str(), r.status.c_str(),
              r.iterations, r.final_loss);
  for (const auto& c : r.checks) {
    std::printf("  %-22s %s (%d/%d violations)\n", c.name.c_str(), deeplin::to_string(c.status()),
                c.violations, c.instances);
  }
  for (const auto& w : r.warnings) std::printf("  warning: %s\n", w.c_str());
  if (!r.message.empty()) std::printf("  %s\n", r.message.c_str());
}

int cmd_run(const std::string& path) {
  const auto run = deeplin::run_scenario(deeplin::load_scenario(path));
  print_report(run.report);
  return code(run.report.exit);
}

int cmd_sweep(const std::string& dir) {
  const auto reports = deeplin::run_sweep(dir, deeplin::workers_from_env());
  int worst = 0;
  for (const auto& r : reports) {
    print_report(r);
    worst = std::max(worst, code(r.exit));
  }
  return worst;
}

int cmd_verify(const std::string& out, const std::vector<int>& only) {
  deeplin::AcceptanceOptions opts;
  opts.out_dir = out;
  const auto& ids = only.empty() ? deeplin::all_criteria() : only;
  const auto results = deeplin::verify_all(ids, opts);
  nlohmann::json summary = nlohmann::json::array();
  bool ok = true;
  for (const auto& r : results) {
    std::printf("%s\n", deeplin::format_line(r).c_str());
    std::fflush(stdout);
    summary.push_back(deeplin::to_json(r));
    ok = ok && r.passed;
  }
  std::ofstream(std::filesystem::path(out) / "acceptance.json") << summary.dump(2) << "\n";
  return code(ok ? ExitCode::ok : ExitCode::check_failure);
}

int cmd_factor(const std::string& path, int layers) {
  const deeplin::Mat a = deeplin::read_matrix_csv_file(path);
  const auto f = deeplin::balanced_factorization(a, layers);
  for (std::size_t i = 0; i < f.factors.size(); ++i) {
    std::printf("# factor %zu\n", i + 1);
    deeplin::write_matrix_csv(std::cout, f.factors[i]);
  }
  std::printf("# reconstruction_residual %.3e\n# balance_residual %.3e\n",
              f.reconstruction_residual, f.balance_residual);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deep linear network training and verification"};
  app.require_subcommand(1);

  std::string config;
  auto* run = app.add_subcommand("run", "Run one scenario config");
  run->add_option("config", config, "Scenario JSON")->required();

  std::string dir;
  auto* sweep = app.add_subcommand("sweep", "Run every *.json config in a directory (DEEPLIN_WORKERS threads)");
  sweep->add_option("dir", dir, "Directory of configs")->required();

  std::string out = "verify_out";
  std::vector<int> only;
  auto* verify = app.add_subcommand("verify", "Run the acceptance suite");
  verify->add_option("--out", out, "Directory for traces and reports");
  verify->add_option("--only", only, "Criterion ids to run");

  std::string matrix;
  int layers = 2;
  auto* factor = app.add_subcommand("factor", "Balanced factorization of a CSV matrix");
  factor->add_option("matrix", matrix, "Matrix CSV ('d,<dim>' header)")->required();
  factor->add_option("--layers,-L", layers, "Number of factors")->required()->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : code(ExitCode::config_error);
  }

  try {
    if (*run) return cmd_run(config);
    if (*sweep) return cmd_sweep(dir);
    if (*verify) return cmd_verify(out, only);
    if (*factor) return cmd_factor(matrix, layers);
  } catch (const deeplin::Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", deeplin::to_string(e.code()), e.what());
    return exit_for(e);
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "error [io]: %s\n", e.what());
    return code(ExitCode::config_error);
  }
  return 0;
}
