// End-to-end acceptance checks, shared by the acceptance test binary and
// the `verify` command.
#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace cityroad {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double budget_seconds = 0.0;  // 0: no runtime limit
};

inline constexpr int kCriterionCount = 12;

/// Runs one criterion (1..12). Exceptions thrown by the run are caught and
/// reported as a failure.
CriterionResult run_criterion(int id);

/// Runs the listed criteria (all when empty), invoking `report` after each.
std::vector<CriterionResult> run_acceptance(std::span<const int> ids = {},
                                            const std::function<void(const CriterionResult&)>& report = {});

/// "PASS  3  steady-state fixed point  (0.01 s)  full=..., limit=..."
std::string format_result(const CriterionResult& r);

}  // namespace cityroad
