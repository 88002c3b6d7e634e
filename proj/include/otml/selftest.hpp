#pragma once

#include <string>
#include <vector>

namespace otml {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;  // measured values or the failure reason
};

// Runs the built-in invariant suite: marginal feasibility, the two epsilon
// limits, kernel duality, hand-computed discrepancy values, gradient spot
// checks, brute-force loss oracles, and metric sanity cases. Pure apart
// from reading otml::testing::kernel_perturbation, which exists so a
// caller can verify the suite detects a broken kernel.
std::vector<CheckResult> run_selftest();

}  // namespace otml
