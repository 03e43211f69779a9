#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace stable_inv::oracle {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double tolerance = 0.0;
};

/// Runs the oracle suites (element mass, elastic forces, tangent, frame
/// indifference, shape functions, two-link Lagrange model) and prints one
/// line per check.
std::vector<CheckResult> run_oracle_suite(std::ostream& out, unsigned seed = 7);

}  // namespace stable_inv::oracle
