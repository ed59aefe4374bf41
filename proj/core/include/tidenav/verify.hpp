#pragma once

// Self-check of the library's invariants on randomized instances, run by `tidenav verify`.

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace tidenav {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::vector<CheckResult> run_invariant_suite(std::uint64_t seed, std::ostream* progress = nullptr);

}  // namespace tidenav
