// Prints one PASS/FAIL line per acceptance criterion; exits nonzero if any fails.
#include <cstdio>
#include <cstdlib>

#include "deeplin/acceptance.hpp"

int main(int argc, char** argv) {
  deeplin::AcceptanceOptions opts;
  if (argc > 1) opts.out_dir = argv[1];
  bool ok = true;
  for (int id : deeplin::all_criteria()) {
    const auto r = deeplin::verify_all({id}, opts).front();
    std::printf("%s\n", deeplin::format_line(r).c_str());
    std::fflush(stdout);
    ok = ok && r.passed;
  }
  return ok ? EXIT_SUCCESS : EXIT_FAILURE;
}
