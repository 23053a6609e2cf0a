#pragma once

// Acceptance suite: twelve end-to-end checks of the library against the
// centralized oracle and the documented qualitative behaviors, run on the
// bundled scenarios. Shared by the `verify` CLI subcommand and the
// acceptance test binary. Every criterion reports one PASS/FAIL line with
// the measured numbers; tolerances live here, in code.

#include <iosfwd>
#include <string>
#include <vector>

namespace distopt::accept {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

// Runs all criteria against the scenario files in data_dir
// (energy_hub.json, gas_lift.json). Throws only on environment problems
// (missing/corrupt scenario files); criterion failures are reported in
// the results.
std::vector<CriterionResult> run_all(const std::string& data_dir);

// Prints one "[PASS]/[FAIL] <id>. <name>: <detail>" line per criterion
// plus a summary; returns the number of failures.
int report(const std::vector<CriterionResult>& results, std::ostream& os);

}  // namespace distopt::accept
