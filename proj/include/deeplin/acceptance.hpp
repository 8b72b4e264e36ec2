#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "deeplin/verify.hpp"

namespace deeplin {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;                    // one-line summary of the measured quantities
  std::vector<std::string> diagnostics;  // supplementary lines, never affect `passed`
  std::vector<CheckReport> checks;
  double seconds = 0.0;
  double time_limit = 0.0;
};

nlohmann::json to_json(const CriterionResult& r);

struct AcceptanceOptions {
  std::filesystem::path out_dir = "verify_out";  // traces and reports land here
};

// Ids of the built-in criteria, 1..10.
const std::vector<int>& all_criteria();

// Runs the selected criteria in the given order; an empty selection runs nothing.
std::vector<CriterionResult> verify_all(const std::vector<int>& selection,
                                        const AcceptanceOptions& opts = {});

// "PASS [3] title: detail (1.23 s)"
std::string format_line(const CriterionResult& r);

}  // namespace deeplin
